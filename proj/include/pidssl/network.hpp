#ifndef PIDSSL_NETWORK_HPP
#define PIDSSL_NETWORK_HPP

#include <cstdint>
#include <cstddef>
#include <vector>

#include "pidssl/matrix.hpp"

namespace pidssl {

enum class Activation { Relu, Tanh };

// Encoder + projector as one MLP. layer_widths runs input -> ... -> projector
// output; the activation applies to every layer except the last. encoder_cut
// is the number of leading layers forming the encoder, so the encoder output
// is the activated output of layer encoder_cut - 1.
struct MlpSpec {
  std::vector<std::size_t> layer_widths;
  Activation activation = Activation::Relu;
  std::size_t encoder_cut = 1;

  std::size_t num_layers() const { return layer_widths.size() - 1; }
  std::size_t input_dim() const { return layer_widths.front(); }
  std::size_t output_dim() const { return layer_widths.back(); }
  std::size_t encoder_dim() const { return layer_widths[encoder_cut]; }
  void validate() const;
};

struct ModelParams {
  std::vector<Matrix> weights;           // weights[l]: widths[l] x widths[l+1]
  std::vector<std::vector<double>> biases;

  bool all_finite() const;
  std::size_t num_layers() const { return weights.size(); }
};

struct ModelGrads {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

// Xavier-uniform weights (U(-sqrt(6/(fan_in+fan_out)), +...)), zero biases;
// fully determined by the seed.
ModelParams init_params(const MlpSpec& spec, std::uint64_t seed);

struct ForwardResult {
  Matrix embeddings;   // n x output_dim
  Matrix encoder_out;  // n x encoder_dim
};

struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // pre-activations per layer
  std::vector<Matrix> post;  // activated outputs per layer (last is linear)
};

ForwardResult forward(const MlpSpec& spec, const ModelParams& params,
                      const Matrix& batch, ForwardCache* cache = nullptr);

// Reverse-mode gradients for all parameters given dL/d(embeddings).
ModelGrads backward(const MlpSpec& spec, const ModelParams& params,
                    const ForwardCache& cache, const Matrix& d_embeddings);

void grads_accumulate(ModelGrads& into, const ModelGrads& other);

// Adam with decoupled weight decay.
struct AdamState {
  std::vector<Matrix> m_w, v_w;
  std::vector<std::vector<double>> m_b, v_b;
  std::uint64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-6;

  static AdamState init(const ModelParams& params);
};

// One optimizer step. Layers below first_trainable_layer are left untouched
// (used for projector-only fine-tuning).
void adam_step(ModelParams& params, const ModelGrads& grads, AdamState& state,
               std::size_t first_trainable_layer = 0);

}  // namespace pidssl

#endif
