#include "pidssl/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "pidssl/rng.hpp"

namespace pidssl {

OffDiagonalTarget OffDiagonalTarget::zero() {
  return OffDiagonalTarget(TargetKind::Zero, Matrix());
}

OffDiagonalTarget OffDiagonalTarget::gaussian(Matrix m) {
  if (m.rows() != m.cols() || m.rows() < 2)
    throw std::invalid_argument("gaussian target: need a square matrix, d >= 2");
  if (!m.all_finite()) throw std::invalid_argument("gaussian target: non-finite entries");
  return OffDiagonalTarget(TargetKind::Gaussian, std::move(m));
}

OffDiagonalTarget OffDiagonalTarget::average(Matrix m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument("average target: need a square matrix");
  if (!m.all_finite()) throw std::invalid_argument("average target: non-finite entries");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j && std::fabs(m(i, j)) > 1.0 + 1e-9)
        throw std::invalid_argument("average target: entries must lie in [-1, 1]");
  return OffDiagonalTarget(TargetKind::Average, std::move(m));
}

void OffDiagonalTarget::require_dim(std::size_t d) const {
  if (kind_ == TargetKind::Zero) return;
  if (m_.rows() != d)
    throw std::invalid_argument("off-diagonal target dimension mismatch");
}

namespace {

// Shared state of the correlation objective
//   L = include_diag * sum_i (1 - C_ii)^2 + lambda sum_{i!=j} (C_ij - M_ij)^2
// evaluated on raw inputs (centering and norm division happen inside).
struct CorrCore {
  Matrix a_hat, b_hat;  // centered columns divided by their norms (0 if dead)
  std::vector<double> norm_a, norm_b;
  std::vector<bool> dead_a, dead_b;
  CrossCorrelation corr;
};

CorrCore corr_forward(const Matrix& a_raw, const Matrix& b_raw, double eps) {
  std::size_t n = a_raw.rows(), d = a_raw.cols();
  CorrCore cc;
  cc.a_hat = a_raw;
  cc.b_hat = b_raw;
  center_columns(cc.a_hat);
  center_columns(cc.b_hat);
  cc.norm_a.assign(d, 0.0);
  cc.norm_b.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* ar = cc.a_hat.row_ptr(r);
    const double* br = cc.b_hat.row_ptr(r);
    for (std::size_t cidx = 0; cidx < d; ++cidx) {
      cc.norm_a[cidx] += ar[cidx] * ar[cidx];
      cc.norm_b[cidx] += br[cidx] * br[cidx];
    }
  }
  double floor2 = eps * static_cast<double>(n);
  cc.dead_a.assign(d, false);
  cc.dead_b.assign(d, false);
  for (std::size_t cidx = 0; cidx < d; ++cidx) {
    cc.dead_a[cidx] = cc.norm_a[cidx] < floor2;
    cc.dead_b[cidx] = cc.norm_b[cidx] < floor2;
    cc.norm_a[cidx] = std::sqrt(cc.norm_a[cidx]);
    cc.norm_b[cidx] = std::sqrt(cc.norm_b[cidx]);
  }
  for (std::size_t r = 0; r < n; ++r) {
    double* ar = cc.a_hat.row_ptr(r);
    double* br = cc.b_hat.row_ptr(r);
    for (std::size_t cidx = 0; cidx < d; ++cidx) {
      ar[cidx] = cc.dead_a[cidx] ? 0.0 : ar[cidx] / cc.norm_a[cidx];
      br[cidx] = cc.dead_b[cidx] ? 0.0 : br[cidx] / cc.norm_b[cidx];
    }
  }
  cc.corr.c = matmul_trans_a(cc.a_hat, cc.b_hat);
  cc.corr.source_batch_size = n;
  for (std::size_t cidx = 0; cidx < d; ++cidx)
    cc.corr.degenerate_columns |= cc.dead_a[cidx] || cc.dead_b[cidx];
  return cc;
}

struct CorrObjective {
  double loss = 0.0, term_diag = 0.0, term_offdiag = 0.0;
};

CorrObjective corr_objective(const Matrix& c, double lambda, bool include_diag,
                             const OffDiagonalTarget& target) {
  std::size_t d = c.rows();
  target.require_dim(d);
  CorrObjective o;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) {
        if (include_diag) {
          double r = 1.0 - c(i, i);
          o.term_diag += r * r;
        }
      } else {
        double r = c(i, j) - target.entry(i, j);
        o.term_offdiag += r * r;
      }
    }
  o.term_offdiag *= lambda;
  o.loss = o.term_diag + o.term_offdiag;
  return o;
}

// dL/dC of the correlation objective; rows/columns of degenerate inputs are
// zeroed (C is held constant there).
Matrix corr_objective_grad_c(const CorrCore& cc, double lambda,
                             bool include_diag, const OffDiagonalTarget& target) {
  const Matrix& c = cc.corr.c;
  std::size_t d = c.rows();
  Matrix gc(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (cc.dead_a[i] || cc.dead_b[j]) continue;
      if (i == j) {
        if (include_diag) gc(i, i) = -2.0 * (1.0 - c(i, i));
      } else {
        gc(i, j) = 2.0 * lambda * (c(i, j) - target.entry(i, j));
      }
    }
  return gc;
}

// Backprop dL/dC to the raw inputs through norm division and centering.
void corr_backward(const CorrCore& cc, const Matrix& gc, Matrix& da, Matrix& db) {
  std::size_t n = cc.a_hat.rows(), d = cc.a_hat.cols();
  const Matrix& c = cc.corr.c;

  std::vector<double> row_dot(d, 0.0), col_dot(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      row_dot[i] += gc(i, j) * c(i, j);
      col_dot[j] += gc(i, j) * c(i, j);
    }

  Matrix p = matmul_trans_b(cc.b_hat, gc);  // P_mi = sum_j b_hat_mj Gc_ij
  Matrix q = matmul(cc.a_hat, gc);          // Q_mj = sum_i a_hat_mi Gc_ij
  da = Matrix(n, d);
  db = Matrix(n, d);
  for (std::size_t m = 0; m < n; ++m) {
    const double* ah = cc.a_hat.row_ptr(m);
    const double* bh = cc.b_hat.row_ptr(m);
    const double* pm = p.row_ptr(m);
    const double* qm = q.row_ptr(m);
    double* dam = da.row_ptr(m);
    double* dbm = db.row_ptr(m);
    for (std::size_t i = 0; i < d; ++i) {
      dam[i] = cc.dead_a[i] ? 0.0 : (pm[i] - ah[i] * row_dot[i]) / cc.norm_a[i];
      dbm[i] = cc.dead_b[i] ? 0.0 : (qm[i] - bh[i] * col_dot[i]) / cc.norm_b[i];
    }
  }
  // Chain through mean-centering (projects out per-column means).
  auto project = [n, d](Matrix& g) {
    std::vector<double> mu = column_means(g);
    for (std::size_t m = 0; m < n; ++m) {
      double* row = g.row_ptr(m);
      for (std::size_t i = 0; i < d; ++i) row[i] -= mu[i];
    }
  };
  project(da);
  project(db);
}

void require_same_shape(const EmbeddingBatch& za, const EmbeddingBatch& zb) {
  if (za.n() != zb.n() || za.d() != zb.d())
    throw std::invalid_argument("loss: embedding shape mismatch");
}

}  // namespace

BtLossResult bt_loss(const EmbeddingBatch& za, const EmbeddingBatch& zb,
                     const BtLossConfig& cfg, const OffDiagonalTarget& target) {
  require_same_shape(za, zb);
  if (cfg.lambda < 0.0) throw std::invalid_argument("bt_loss: lambda must be >= 0");
  CorrCore cc = corr_forward(za.data(), zb.data(), cfg.eps);
  CorrObjective o = corr_objective(cc.corr.c, cfg.lambda, true, target);
  BtLossResult out;
  out.loss = o.loss;
  out.term_diag = o.term_diag;
  out.term_offdiag = o.term_offdiag;
  out.corr = std::move(cc.corr);
  return out;
}

BtLossGrad bt_loss_grad(const EmbeddingBatch& za, const EmbeddingBatch& zb,
                        const BtLossConfig& cfg, const OffDiagonalTarget& target) {
  require_same_shape(za, zb);
  if (cfg.lambda < 0.0) throw std::invalid_argument("bt_loss: lambda must be >= 0");
  CorrCore cc = corr_forward(za.data(), zb.data(), cfg.eps);
  CorrObjective o = corr_objective(cc.corr.c, cfg.lambda, true, target);
  Matrix gc = corr_objective_grad_c(cc, cfg.lambda, true, target);
  BtLossGrad out;
  corr_backward(cc, gc, out.dza, out.dzb);
  out.value.loss = o.loss;
  out.value.term_diag = o.term_diag;
  out.value.term_offdiag = o.term_offdiag;
  out.value.corr = std::move(cc.corr);
  return out;
}

OffDiagonalTarget sample_gaussian_target(std::size_t d, double sigma,
                                         std::uint64_t seed, bool clamp_to_unit) {
  if (d < 2) throw std::invalid_argument("gaussian target: d must be >= 2");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian target: sigma must be > 0");
  Rng rng = Rng::stream({seed, kStreamGaussTarget});
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) continue;
      double v = sigma * rng.normal();
      if (clamp_to_unit) v = std::min(1.0, std::max(-1.0, v));
      m(i, j) = v;
    }
  return OffDiagonalTarget::gaussian(std::move(m));
}

void AverageAccumulator::accumulate(const CrossCorrelation& c) {
  if (count_ == 0 && sum_.empty()) sum_ = Matrix(c.c.rows(), c.c.cols());
  if (!sum_.same_shape(c.c))
    throw std::invalid_argument("average accumulator: dimension mismatch");
  sum_ += c.c;
  ++count_;
}

Matrix AverageAccumulator::mean() const {
  if (count_ == 0) throw std::runtime_error("average accumulator: no batches seen");
  Matrix m = sum_;
  m *= 1.0 / static_cast<double>(count_);
  return m;
}

AverageAccumulator AverageAccumulator::merged(const AverageAccumulator& a,
                                              const AverageAccumulator& b) {
  if (a.count_ == 0) return b;
  if (b.count_ == 0) return a;
  if (!a.sum_.same_shape(b.sum_))
    throw std::invalid_argument("average accumulator: dimension mismatch");
  AverageAccumulator out;
  out.sum_ = a.sum_;
  out.sum_ += b.sum_;
  out.count_ = a.count_ + b.count_;
  return out;
}

namespace {

// Whiten-then-row-normalize forward pass with everything the backward needs.
struct WhitenNormCache {
  Matrix xc;  // centered input, n x d
  Matrix l;   // Cholesky factor of cov + jitter I
  Matrix w;   // whitened rows
  Matrix u;   // row-normalized w
  std::vector<double> row_norm;
};

WhitenNormCache whiten_normalize_forward(const EmbeddingBatch& x, double jitter) {
  std::size_t n = x.n(), d = x.d();
  WhitenNormCache cache;
  cache.xc = x.data();
  center_columns(cache.xc);

  Matrix sigma = matmul_trans_a(cache.xc, cache.xc);
  sigma *= 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i) sigma(i, i) += jitter;
  cache.l = cholesky_lower(sigma);

  cache.w = Matrix(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = cache.xc.row_ptr(r);
    double* wr = cache.w.row_ptr(r);
    for (std::size_t i = 0; i < d; ++i) {
      double s = xr[i];
      for (std::size_t k = 0; k < i; ++k) s -= cache.l(i, k) * wr[k];
      wr[i] = s / cache.l(i, i);
    }
  }

  cache.u = cache.w;
  cache.row_norm.assign(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double* ur = cache.u.row_ptr(r);
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += ur[i] * ur[i];
    double nrm = std::sqrt(s);
    cache.row_norm[r] = nrm;
    if (nrm < 1e-12) continue;
    for (std::size_t i = 0; i < d; ++i) ur[i] /= nrm;
  }
  return cache;
}

// Lower-triangular inverse by forward substitution.
Matrix lower_triangular_inverse(const Matrix& l) {
  std::size_t d = l.rows();
  Matrix inv(d, d);
  for (std::size_t col = 0; col < d; ++col) {
    for (std::size_t i = col; i < d; ++i) {
      double s = (i == col) ? 1.0 : 0.0;
      for (std::size_t k = col; k < i; ++k) s -= l(i, k) * inv(k, col);
      inv(i, col) = s / l(i, i);
    }
  }
  return inv;
}

// Reverse-mode pass through row normalization, the triangular solve, and the
// Cholesky factorization of the batch covariance, back to the raw input.
Matrix whiten_normalize_backward(const WhitenNormCache& cache, const Matrix& du) {
  std::size_t n = cache.xc.rows(), d = cache.xc.cols();

  // Row normalization: dw = (du - (du . u) u) / ||w||.
  Matrix dw(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    double nrm = cache.row_norm[r];
    if (nrm < 1e-12) continue;
    const double* ur = cache.u.row_ptr(r);
    const double* dur = du.row_ptr(r);
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot += dur[i] * ur[i];
    double* dwr = dw.row_ptr(r);
    for (std::size_t i = 0; i < d; ++i) dwr[i] = (dur[i] - dot * ur[i]) / nrm;
  }

  // W = Xc L^{-T}. Direct term: dXc += dW L^{-1}, solved as Z L = dW.
  Matrix dxc(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const double* dwr = dw.row_ptr(r);
    double* zr = dxc.row_ptr(r);
    for (std::size_t jj = d; jj-- > 0;) {
      double s = dwr[jj];
      for (std::size_t k = jj + 1; k < d; ++k) s -= zr[k] * cache.l(k, jj);
      zr[jj] = s / cache.l(jj, jj);
    }
  }

  // Sensitivity w.r.t. A = L^{-T}, then w.r.t. L (masked to the lower triangle).
  Matrix ga = matmul_trans_a(cache.xc, dw);  // d x d
  Matrix linv = lower_triangular_inverse(cache.l);
  Matrix a = linv.transposed();  // A = L^{-T}
  Matrix gl = matmul(a, matmul(ga.transposed(), a));
  gl *= -1.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) gl(i, j) = 0.0;

  // Cholesky backward: sigma_bar = 1/2 L^{-T} (Phi(L^T gl) + Phi(L^T gl)^T) L^{-1}
  // with Phi = lower triangle, diagonal halved.
  Matrix m = matmul_trans_a(cache.l, gl);
  Matrix phi(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) phi(i, j) = m(i, j);
    phi(i, i) = 0.5 * m(i, i);
  }
  Matrix s = phi + phi.transposed();
  Matrix sigma_bar = matmul(a, matmul(s, linv));
  sigma_bar *= 0.5;

  // Covariance term: dXc += Xc (sigma_bar + sigma_bar^T) / (n - 1).
  Matrix sym = sigma_bar + sigma_bar.transposed();
  sym *= 1.0 / static_cast<double>(n - 1);
  dxc += matmul(cache.xc, sym);

  // Chain through mean-centering.
  std::vector<double> mu = column_means(dxc);
  for (std::size_t r = 0; r < n; ++r) {
    double* row = dxc.row_ptr(r);
    for (std::size_t i = 0; i < d; ++i) row[i] -= mu[i];
  }
  return dxc;
}

double mse_rows(const Matrix& u1, const Matrix& u2) {
  double s = 0.0;
  for (std::size_t r = 0; r < u1.rows(); ++r) {
    const double* a = u1.row_ptr(r);
    const double* b = u2.row_ptr(r);
    for (std::size_t i = 0; i < u1.cols(); ++i) {
      double dv = a[i] - b[i];
      s += dv * dv;
    }
  }
  return s / static_cast<double>(u1.rows());
}

}  // namespace

WmseResult wmse_loss(const EmbeddingBatch& za, const EmbeddingBatch& zb,
                     double jitter) {
  require_same_shape(za, zb);
  WhitenNormCache c1 = whiten_normalize_forward(za, jitter);
  WhitenNormCache c2 = whiten_normalize_forward(zb, jitter);
  WmseResult out;
  out.term_mse = mse_rows(c1.u, c2.u);
  out.loss = out.term_mse;
  out.corr = cross_correlation(EmbeddingBatch(c1.u), EmbeddingBatch(c2.u));
  return out;
}

WmseGrad wmse_loss_grad(const EmbeddingBatch& za, const EmbeddingBatch& zb,
                        double jitter) {
  require_same_shape(za, zb);
  WhitenNormCache c1 = whiten_normalize_forward(za, jitter);
  WhitenNormCache c2 = whiten_normalize_forward(zb, jitter);
  std::size_t n = za.n(), d = za.d();

  WmseGrad out;
  out.value.term_mse = mse_rows(c1.u, c2.u);
  out.value.loss = out.value.term_mse;
  out.value.corr = cross_correlation(EmbeddingBatch(c1.u), EmbeddingBatch(c2.u));

  double scale = 2.0 / static_cast<double>(n);
  Matrix du1(n, d), du2(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < d; ++i) {
      double g = scale * (c1.u(r, i) - c2.u(r, i));
      du1(r, i) = g;
      du2(r, i) = -g;
    }
  out.dza = whiten_normalize_backward(c1, du1);
  out.dzb = whiten_normalize_backward(c2, du2);
  return out;
}

WmseResult wmse_variant_loss(const EmbeddingBatch& za, const EmbeddingBatch& zb,
                             const BtLossConfig& cfg,
                             const OffDiagonalTarget& target, double jitter) {
  require_same_shape(za, zb);
  WhitenNormCache c1 = whiten_normalize_forward(za, jitter);
  WhitenNormCache c2 = whiten_normalize_forward(zb, jitter);
  CorrCore cc = corr_forward(c1.u, c2.u, cfg.eps);
  CorrObjective o = corr_objective(cc.corr.c, cfg.lambda, false, target);
  WmseResult out;
  out.term_mse = mse_rows(c1.u, c2.u);
  out.term_offdiag = o.term_offdiag;
  out.loss = out.term_mse + out.term_offdiag;
  out.corr = std::move(cc.corr);
  return out;
}

WmseGrad wmse_variant_loss_grad(const EmbeddingBatch& za,
                                const EmbeddingBatch& zb,
                                const BtLossConfig& cfg,
                                const OffDiagonalTarget& target, double jitter) {
  require_same_shape(za, zb);
  WhitenNormCache c1 = whiten_normalize_forward(za, jitter);
  WhitenNormCache c2 = whiten_normalize_forward(zb, jitter);
  std::size_t n = za.n(), d = za.d();

  CorrCore cc = corr_forward(c1.u, c2.u, cfg.eps);
  CorrObjective o = corr_objective(cc.corr.c, cfg.lambda, false, target);
  Matrix gc = corr_objective_grad_c(cc, cfg.lambda, false, target);
  Matrix du1_pen, du2_pen;
  corr_backward(cc, gc, du1_pen, du2_pen);

  double scale = 2.0 / static_cast<double>(n);
  Matrix du1(n, d), du2(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < d; ++i) {
      double g = scale * (c1.u(r, i) - c2.u(r, i));
      du1(r, i) = g + du1_pen(r, i);
      du2(r, i) = -g + du2_pen(r, i);
    }

  WmseGrad out;
  out.value.term_mse = mse_rows(c1.u, c2.u);
  out.value.term_offdiag = o.term_offdiag;
  out.value.loss = out.value.term_mse + out.value.term_offdiag;
  out.value.corr = std::move(cc.corr);
  out.dza = whiten_normalize_backward(c1, du1);
  out.dzb = whiten_normalize_backward(c2, du2);
  return out;
}

}  // namespace pidssl
