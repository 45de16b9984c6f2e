#ifndef PIDSSL_LOSSES_HPP
#define PIDSSL_LOSSES_HPP

#include <cstdint>
#include <cstddef>

#include "pidssl/linalg.hpp"
#include "pidssl/matrix.hpp"

namespace pidssl {

enum class TargetKind { Zero, Gaussian, Average };

// The matrix the off-diagonal entries of the cross-correlation are pulled
// toward. Zero carries no matrix; Gaussian and Average carry a d x d matrix
// whose diagonal is ignored.
class OffDiagonalTarget {
 public:
  static OffDiagonalTarget zero();
  static OffDiagonalTarget gaussian(Matrix m);
  static OffDiagonalTarget average(Matrix m);

  TargetKind kind() const { return kind_; }
  const Matrix& matrix() const { return m_; }
  // Off-diagonal entry the correlation C_ij is pulled toward.
  double entry(std::size_t i, std::size_t j) const {
    return kind_ == TargetKind::Zero ? 0.0 : m_(i, j);
  }
  void require_dim(std::size_t d) const;

 private:
  OffDiagonalTarget(TargetKind k, Matrix m) : kind_(k), m_(std::move(m)) {}
  TargetKind kind_;
  Matrix m_;
};

struct BtLossConfig {
  double lambda = 5e-3;  // off-diagonal weight; 0.1 in the synergy phase
  double eps = 1e-5;     // degenerate-column variance guard
};

struct BtLossResult {
  double loss = 0.0;
  double term_diag = 0.0;     // sum_i (1 - C_ii)^2
  double term_offdiag = 0.0;  // lambda * sum_{i != j} (C_ij - M_ij)^2
  CrossCorrelation corr;
};

// loss = sum_i (1 - C_ii)^2 + lambda sum_{i!=j} (C_ij - M_ij)^2, with C the
// Pearson cross-correlation of the two raw embedding batches.
BtLossResult bt_loss(const EmbeddingBatch& za, const EmbeddingBatch& zb,
                     const BtLossConfig& cfg, const OffDiagonalTarget& target);

struct BtLossGrad {
  BtLossResult value;
  Matrix dza;  // n x d, gradient w.r.t. the raw embeddings
  Matrix dzb;
};

// Exact gradients of bt_loss through the centering and norm division.
BtLossGrad bt_loss_grad(const EmbeddingBatch& za, const EmbeddingBatch& zb,
                        const BtLossConfig& cfg, const OffDiagonalTarget& target);

// Off-diagonal entries iid Normal(0, sigma^2), diagonal zero, fixed by seed.
// Sampled once per synergy phase and then frozen. clamp_to_unit optionally
// clips entries to [-1, 1] (off by default; N(0,1) targets may exceed the
// reachable correlation range).
OffDiagonalTarget sample_gaussian_target(std::size_t d, double sigma,
                                         std::uint64_t seed,
                                         bool clamp_to_unit = false);

// Running mean of cross-correlation matrices. Single writer; merge combines
// accumulators from concurrent workers.
class AverageAccumulator {
 public:
  AverageAccumulator() = default;
  explicit AverageAccumulator(std::size_t d) : sum_(d, d), count_(0) {}

  void accumulate(const CrossCorrelation& c);
  Matrix mean() const;
  std::size_t count() const { return count_; }
  const Matrix& sum() const { return sum_; }

  static AverageAccumulator merged(const AverageAccumulator& a,
                                   const AverageAccumulator& b);

 private:
  Matrix sum_;
  std::size_t count_ = 0;
};

struct WmseResult {
  double loss = 0.0;
  double term_mse = 0.0;      // mean per-row squared distance of the two views
  double term_offdiag = 0.0;  // variant penalty (0 for plain wmse)
  CrossCorrelation corr;      // correlation of the whitened, normalized views
};

// Mean squared error between L2-normalized rows of the Cholesky-whitened
// batches: (1/n) sum_m ||u1_m - u2_m||^2.
WmseResult wmse_loss(const EmbeddingBatch& za, const EmbeddingBatch& zb,
                     double jitter);

struct WmseGrad {
  WmseResult value;
  Matrix dza;
  Matrix dzb;
};

WmseGrad wmse_loss_grad(const EmbeddingBatch& za, const EmbeddingBatch& zb,
                        double jitter);

// wmse_loss plus lambda sum_{i!=j} (Chat_ij - M_ij)^2 where Chat is the
// cross-correlation of the whitened, normalized embeddings.
WmseResult wmse_variant_loss(const EmbeddingBatch& za, const EmbeddingBatch& zb,
                             const BtLossConfig& cfg,
                             const OffDiagonalTarget& target, double jitter);

WmseGrad wmse_variant_loss_grad(const EmbeddingBatch& za,
                                const EmbeddingBatch& zb,
                                const BtLossConfig& cfg,
                                const OffDiagonalTarget& target, double jitter);

}  // namespace pidssl

#endif
