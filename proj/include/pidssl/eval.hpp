#ifndef PIDSSL_EVAL_HPP
#define PIDSSL_EVAL_HPP

#include <cstdint>
#include <vector>

#include "pidssl/augment.hpp"
#include "pidssl/dataset.hpp"
#include "pidssl/network.hpp"
#include "pidssl/pid.hpp"

namespace pidssl {

struct ProbeConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 128;
  double lr = 0.05;
  std::uint64_t seed = 7;
};

// Frozen-encoder linear evaluation: a single affine layer plus softmax
// trained with cross-entropy and Adam on encoder outputs. Inputs are
// unaugmented unless a policy is supplied, in which case one stochastic view
// per sample feeds the probe (the diagnostic path). Returns test top-1.
double linear_probe(const MlpSpec& spec, const ModelParams& params,
                    const std::vector<ImageSample>& train_data,
                    const std::vector<ImageSample>& test_data,
                    const ProbeConfig& cfg,
                    const AugmentPolicy* policy = nullptr);

double top1_accuracy(const std::vector<int>& predictions,
                     const std::vector<int>& labels);

// PID of the class label against the encoder outputs of the two augmented
// views, with a shuffled-label control measuring the finite-sample bias
// floor. Dimensions are the top `num_dims` encoder dimensions by variance.
struct PidDiagnosticReport {
  PidDecomposition decomposition;
  PidDecomposition control;  // same pipeline, labels shuffled
  int bins = 4;
  std::vector<std::size_t> dims_used;
  std::size_t sample_count = 0;
};

PidDiagnosticReport pid_diagnostic(const MlpSpec& spec, const ModelParams& params,
                                   const std::vector<ImageSample>& data,
                                   const AugmentPolicy& policy, int bins,
                                   std::size_t num_dims, std::uint64_t seed);

// Encoder outputs of unaugmented samples, one row per sample.
Matrix encode_clean(const MlpSpec& spec, const ModelParams& params,
                    const std::vector<ImageSample>& samples);

}  // namespace pidssl

#endif
