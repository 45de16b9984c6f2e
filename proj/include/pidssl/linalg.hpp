#ifndef PIDSSL_LINALG_HPP
#define PIDSSL_LINALG_HPP

#include <cstddef>
#include <vector>

#include "pidssl/matrix.hpp"

namespace pidssl {

// A batch of n embedding rows in d dimensions. Construction validates that
// every entry is finite and that n >= 2, d >= 1; shape is immutable after.
class EmbeddingBatch {
 public:
  explicit EmbeddingBatch(Matrix data);

  std::size_t n() const { return data_.rows(); }
  std::size_t d() const { return data_.cols(); }
  const Matrix& data() const { return data_; }

 private:
  Matrix data_;
};

// Cross-correlation matrix between two embedding streams. Entries lie in
// [-1, 1] up to 1e-9. Rows/columns of degenerate (near-zero-norm) input
// columns are zeroed and flagged.
struct CrossCorrelation {
  Matrix c;
  std::size_t source_batch_size = 0;
  bool degenerate_columns = false;
};

// Column standardization: mean 0, unit population standard deviation per
// column. Columns whose population variance is below eps become all zeros.
EmbeddingBatch standardize_columns(const EmbeddingBatch& batch, double eps);

// C_ij = sum_m a_mi b_mj / (||a_i|| ||b_j||) on mean-centered columns
// (Pearson form). Columns with centered population variance below eps are
// treated as degenerate: their row/column of C is zero and the result is
// flagged.
CrossCorrelation cross_correlation(const EmbeddingBatch& za,
                                   const EmbeddingBatch& zb,
                                   double eps = 1e-12);

// Sample covariance (divide by n-1) of mean-centered columns.
Matrix covariance(const EmbeddingBatch& batch);

// Lower-triangular L with L L^T = m. Requires m symmetric within 1e-9 and
// positive definite; throws "matrix not positive definite" otherwise.
Matrix cholesky_lower(const Matrix& m);

// Mean-center, then multiply by the inverse transpose of the Cholesky factor
// of (covariance + jitter I). With jitter 0 and a full-rank batch, the output
// sample covariance is the identity within 1e-6.
EmbeddingBatch whiten_cholesky(const EmbeddingBatch& batch, double jitter);

// Scale-aware default jitter: 1e-5 * trace(cov) / d.
double default_whiten_jitter(const EmbeddingBatch& batch);

// Each row scaled to unit Euclidean norm; rows with norm below eps are left
// as zeros.
EmbeddingBatch l2_normalize_rows(const EmbeddingBatch& batch, double eps = 1e-12);

// Column means of a matrix (helper shared with the loss gradients).
std::vector<double> column_means(const Matrix& m);

// Subtract column means in place.
void center_columns(Matrix& m);

}  // namespace pidssl

#endif
