#include "pidssl/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace pidssl {

EmbeddingBatch::EmbeddingBatch(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 2 || data_.cols() < 1)
    throw std::invalid_argument("embedding batch needs n >= 2 and d >= 1");
  if (!data_.all_finite()) throw std::runtime_error("non-finite input");
}

std::vector<double> column_means(const Matrix& m) {
  std::vector<double> mu(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = m.row_ptr(r);
    for (std::size_t c = 0; c < m.cols(); ++c) mu[c] += row[c];
  }
  double inv_n = 1.0 / static_cast<double>(m.rows());
  for (double& v : mu) v *= inv_n;
  return mu;
}

void center_columns(Matrix& m) {
  std::vector<double> mu = column_means(m);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double* row = m.row_ptr(r);
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] -= mu[c];
  }
}

EmbeddingBatch standardize_columns(const EmbeddingBatch& batch, double eps) {
  Matrix x = batch.data();
  std::size_t n = x.rows(), d = x.cols();
  std::vector<double> mu = column_means(x);
  std::vector<double> var(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = x.row_ptr(r);
    for (std::size_t c = 0; c < d; ++c) {
      double dv = row[c] - mu[c];
      var[c] += dv * dv;
    }
  }
  for (double& v : var) v /= static_cast<double>(n);  // population convention

  for (std::size_t c = 0; c < d; ++c) {
    if (var[c] < eps) {
      for (std::size_t r = 0; r < n; ++r) x(r, c) = 0.0;
    } else {
      double inv_sd = 1.0 / std::sqrt(var[c]);
      for (std::size_t r = 0; r < n; ++r) x(r, c) = (x(r, c) - mu[c]) * inv_sd;
    }
  }
  return EmbeddingBatch(std::move(x));
}

CrossCorrelation cross_correlation(const EmbeddingBatch& za,
                                   const EmbeddingBatch& zb, double eps) {
  if (za.n() != zb.n() || za.d() != zb.d())
    throw std::invalid_argument("cross_correlation: shape mismatch");
  std::size_t n = za.n(), d = za.d();

  Matrix a = za.data();
  Matrix b = zb.data();
  center_columns(a);
  center_columns(b);

  auto col_norms = [n, d](const Matrix& m) {
    std::vector<double> nrm(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = m.row_ptr(r);
      for (std::size_t c = 0; c < d; ++c) nrm[c] += row[c] * row[c];
    }
    for (double& v : nrm) v = std::sqrt(v);
    return nrm;
  };
  std::vector<double> na = col_norms(a);
  std::vector<double> nb = col_norms(b);

  // Degenerate when the centered population variance (norm^2 / n) is below eps.
  double floor2 = eps * static_cast<double>(n);
  bool degenerate = false;
  std::vector<bool> dead_a(d, false), dead_b(d, false);
  for (std::size_t c = 0; c < d; ++c) {
    if (na[c] * na[c] < floor2) dead_a[c] = true, degenerate = true;
    if (nb[c] * nb[c] < floor2) dead_b[c] = true, degenerate = true;
  }

  CrossCorrelation out;
  out.source_batch_size = n;
  out.degenerate_columns = degenerate;
  out.c = matmul_trans_a(a, b);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (dead_a[i] || dead_b[j]) {
        out.c(i, j) = 0.0;
      } else {
        out.c(i, j) /= na[i] * nb[j];
      }
    }
  return out;
}

Matrix covariance(const EmbeddingBatch& batch) {
  Matrix x = batch.data();
  center_columns(x);
  Matrix cov = matmul_trans_a(x, x);
  cov *= 1.0 / static_cast<double>(batch.n() - 1);
  return cov;
}

Matrix cholesky_lower(const Matrix& m) {
  std::size_t d = m.rows();
  if (d == 0 || m.cols() != d) throw std::invalid_argument("cholesky: not square");
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (std::fabs(m(i, j) - m(j, i)) > 1e-9)
        throw std::invalid_argument("cholesky: matrix not symmetric");

  // Relative pivot floor: exact rank deficiency rounds to pivots of either
  // sign near machine epsilon times the matrix scale.
  double scale = 0.0;
  for (std::size_t i = 0; i < d; ++i) scale = std::max(scale, std::fabs(m(i, i)));
  double pivot_floor = 1e-12 * std::max(scale, 1e-300);

  Matrix l(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    double diag = m(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > pivot_floor)) throw std::runtime_error("matrix not positive definite");
    double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

double default_whiten_jitter(const EmbeddingBatch& batch) {
  Matrix cov = covariance(batch);
  double tr = 0.0;
  for (std::size_t i = 0; i < cov.rows(); ++i) tr += cov(i, i);
  return 1e-5 * tr / static_cast<double>(cov.rows());
}

EmbeddingBatch whiten_cholesky(const EmbeddingBatch& batch, double jitter) {
  std::size_t n = batch.n(), d = batch.d();
  Matrix xc = batch.data();
  center_columns(xc);

  Matrix sigma = matmul_trans_a(xc, xc);
  sigma *= 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i) sigma(i, i) += jitter;

  Matrix l = cholesky_lower(sigma);

  // W = Xc L^{-T}: solve L y = x row-wise by forward substitution.
  Matrix w(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const double* x = xc.row_ptr(r);
    double* y = w.row_ptr(r);
    for (std::size_t i = 0; i < d; ++i) {
      double s = x[i];
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
      y[i] = s / l(i, i);
    }
  }
  return EmbeddingBatch(std::move(w));
}

EmbeddingBatch l2_normalize_rows(const EmbeddingBatch& batch, double eps) {
  Matrix x = batch.data();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double* row = x.row_ptr(r);
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) s += row[c] * row[c];
    double nrm = std::sqrt(s);
    if (nrm < eps) continue;  // zero rows stay zero
    for (std::size_t c = 0; c < x.cols(); ++c) row[c] /= nrm;
  }
  return EmbeddingBatch(std::move(x));
}

}  // namespace pidssl
