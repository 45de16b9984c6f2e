#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pidssl/losses.hpp"
#include "pidssl/rng.hpp"
#include "testutil.hpp"

using namespace pidssl;

namespace {

// n=4 batch whose centered columns are orthogonal with equal norms, so the
// self cross-correlation is exactly the identity.
Matrix decorrelated_batch() {
  Matrix m(4, 2);
  double c1[] = {1, -1, 1, -1}, c2[] = {1, 1, -1, -1};
  for (int r = 0; r < 4; ++r) {
    m(r, 0) = c1[r];
    m(r, 1) = c2[r];
  }
  return m;
}

OffDiagonalTarget random_target(TargetKind kind, std::size_t d, Rng& rng) {
  if (kind == TargetKind::Zero) return OffDiagonalTarget::zero();
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (i != j) m(i, j) = kind == TargetKind::Gaussian ? rng.normal()
                                                         : rng.uniform(-1, 1);
  return kind == TargetKind::Gaussian ? OffDiagonalTarget::gaussian(m)
                                      : OffDiagonalTarget::average(m);
}

}  // namespace

TEST_CASE("bt_loss fixed points and frozen values") {
  BtLossConfig cfg;
  CHECK(cfg.lambda == 5e-3);  // phase-1 default weight

  // decorrelated identical views: C = I, zero loss
  Matrix m = decorrelated_batch();
  BtLossResult r = bt_loss(EmbeddingBatch(m), EmbeddingBatch(m), cfg,
                           OffDiagonalTarget::zero());
  CHECK(std::fabs(r.loss) <= 1e-10);

  // orthogonal streams: C = 0, loss = d * (1-0)^2 = 8 for d=8
  Matrix a(4, 8), b(4, 8);
  double c1[] = {1, -1, 1, -1}, c2[] = {1, 1, -1, -1};
  for (int r2 = 0; r2 < 4; ++r2)
    for (int c = 0; c < 8; ++c) {
      a(r2, c) = c1[r2];
      b(r2, c) = c2[r2];
    }
  BtLossResult rz = bt_loss(EmbeddingBatch(a), EmbeddingBatch(b), cfg,
                            OffDiagonalTarget::zero());
  CHECK(rz.loss == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(rz.term_offdiag == doctest::Approx(0.0).epsilon(1e-12));

  // a Gaussian target equal to C's off-diagonal kills the second term
  Rng rng(11);
  Matrix za = testutil::random_matrix(rng, 16, 4);
  Matrix zb = testutil::random_matrix(rng, 16, 4);
  BtLossResult base = bt_loss(EmbeddingBatch(za), EmbeddingBatch(zb), cfg,
                              OffDiagonalTarget::zero());
  Matrix g = base.corr.c;
  for (std::size_t i = 0; i < 4; ++i) g(i, i) = 0.0;
  BtLossResult matched = bt_loss(EmbeddingBatch(za), EmbeddingBatch(zb), cfg,
                                 OffDiagonalTarget::gaussian(g));
  CHECK(matched.term_offdiag <= 1e-12);
  CHECK(matched.loss == doctest::Approx(matched.term_diag).epsilon(1e-12));
}

TEST_CASE("bt_loss rejects mismatched shapes and negative lambda") {
  Rng rng(12);
  Matrix a = testutil::random_matrix(rng, 8, 4);
  Matrix b = testutil::random_matrix(rng, 8, 3);
  CHECK_THROWS_AS(bt_loss(EmbeddingBatch(a), EmbeddingBatch(b), BtLossConfig{},
                          OffDiagonalTarget::zero()),
                  std::invalid_argument);
  BtLossConfig bad;
  bad.lambda = -1.0;
  CHECK_THROWS_AS(bt_loss(EmbeddingBatch(a), EmbeddingBatch(a), bad,
                          OffDiagonalTarget::zero()),
                  std::invalid_argument);
}

TEST_CASE("bt_loss_grad matches central finite differences for all targets") {
  Rng rng(13);
  BtLossConfig cfg;
  cfg.lambda = 0.1;
  for (TargetKind kind : {TargetKind::Zero, TargetKind::Gaussian, TargetKind::Average}) {
    for (int trial = 0; trial < 7; ++trial) {
      Matrix za = testutil::random_matrix(rng, 16, 8, 1.0, 0.3);
      Matrix zb = testutil::random_matrix(rng, 16, 8, 1.2, -0.2);
      OffDiagonalTarget target = random_target(kind, 8, rng);

      BtLossGrad g = bt_loss_grad(EmbeddingBatch(za), EmbeddingBatch(zb), cfg, target);
      auto loss_a = [&](const Matrix& x) {
        return bt_loss(EmbeddingBatch(x), EmbeddingBatch(zb), cfg, target).loss;
      };
      auto loss_b = [&](const Matrix& x) {
        return bt_loss(EmbeddingBatch(za), EmbeddingBatch(x), cfg, target).loss;
      };
      CHECK(testutil::rel_err_inf(g.dza, testutil::fd_gradient(loss_a, za)) <= 1e-4);
      CHECK(testutil::rel_err_inf(g.dzb, testutil::fd_gradient(loss_b, zb)) <= 1e-4);
    }
  }
}

TEST_CASE("bt_loss_grad symmetry and stationarity") {
  Rng rng(17);
  Matrix z = testutil::random_matrix(rng, 12, 5);
  BtLossGrad g = bt_loss_grad(EmbeddingBatch(z), EmbeddingBatch(z), BtLossConfig{},
                              OffDiagonalTarget::zero());
  CHECK((g.dza - g.dzb).max_abs() <= 1e-12);

  // global minimum: C = I with zero target, gradient vanishes
  Matrix m = decorrelated_batch();
  BtLossGrad g0 = bt_loss_grad(EmbeddingBatch(m), EmbeddingBatch(m), BtLossConfig{},
                               OffDiagonalTarget::zero());
  CHECK(g0.dza.max_abs() <= 1e-8);
  CHECK(g0.dzb.max_abs() <= 1e-8);
}

TEST_CASE("bt_loss invariances") {
  Rng rng(19);
  BtLossConfig cfg;
  cfg.lambda = 0.05;
  Matrix za = testutil::random_matrix(rng, 10, 4);
  Matrix zb = testutil::random_matrix(rng, 10, 4);
  double base = bt_loss(EmbeddingBatch(za), EmbeddingBatch(zb), cfg,
                        OffDiagonalTarget::zero())
                    .loss;

  // simultaneous row permutation of both views
  std::vector<std::uint32_t> perm = rng.permutation(10);
  Matrix pa(10, 4), pb(10, 4);
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      pa(r, c) = za(perm[r], c);
      pb(r, c) = zb(perm[r], c);
    }
  double permuted = bt_loss(EmbeddingBatch(pa), EmbeddingBatch(pb), cfg,
                            OffDiagonalTarget::zero())
                        .loss;
  CHECK(permuted == doctest::Approx(base).epsilon(1e-12));

  // per-column affine rescaling is absorbed by the standardization
  Matrix sa = za;
  for (std::size_t c = 0; c < 4; ++c) {
    double scale = 0.1 + 5.0 * rng.uniform();
    double shift = rng.uniform(-3, 3);
    for (std::size_t r = 0; r < 10; ++r) sa(r, c) = scale * sa(r, c) + shift;
  }
  double rescaled = bt_loss(EmbeddingBatch(sa), EmbeddingBatch(zb), cfg,
                            OffDiagonalTarget::zero())
                        .loss;
  CHECK(std::fabs(rescaled - base) <= 1e-9);

  // non-negativity across random targets
  for (int trial = 0; trial < 30; ++trial) {
    TargetKind kind = trial % 3 == 0   ? TargetKind::Zero
                      : trial % 3 == 1 ? TargetKind::Gaussian
                                       : TargetKind::Average;
    OffDiagonalTarget tgt = random_target(kind, 4, rng);
    Matrix xa = testutil::random_matrix(rng, 8, 4, 2.0);
    Matrix xb = testutil::random_matrix(rng, 8, 4, 2.0);
    CHECK(bt_loss(EmbeddingBatch(xa), EmbeddingBatch(xb), cfg, tgt).loss >= 0.0);
  }
}

TEST_CASE("sample_gaussian_target determinism and moments") {
  OffDiagonalTarget t1 = sample_gaussian_target(64, 1.0, 42);
  OffDiagonalTarget t2 = sample_gaussian_target(64, 1.0, 42);
  CHECK((t1.matrix() == t2.matrix()));
  OffDiagonalTarget t3 = sample_gaussian_target(64, 1.0, 43);
  CHECK_FALSE((t1.matrix() == t3.matrix()));

  for (std::size_t i = 0; i < 64; ++i) CHECK(t1.matrix()(i, i) == 0.0);

  double mean = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j)
      if (i != j) {
        mean += t1.matrix()(i, j);
        ++cnt;
      }
  mean /= static_cast<double>(cnt);
  CHECK(std::fabs(mean) <= 4.0 / std::sqrt(static_cast<double>(cnt)));

  CHECK_THROWS_AS(sample_gaussian_target(64, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_gaussian_target(1, 1.0, 1), std::invalid_argument);

  OffDiagonalTarget clamped = sample_gaussian_target(16, 3.0, 7, true);
  for (double v : clamped.matrix().raw()) CHECK(std::fabs(v) <= 1.0);
}

TEST_CASE("average accumulator") {
  Rng rng(23);
  Matrix za = testutil::random_matrix(rng, 12, 3);
  Matrix zb = testutil::random_matrix(rng, 12, 3);
  CrossCorrelation c = cross_correlation(EmbeddingBatch(za), EmbeddingBatch(zb));

  AverageAccumulator acc;
  acc.accumulate(c);
  CHECK(((acc.mean()) == c.c));

  CrossCorrelation neg = c;
  neg.c *= -1.0;
  acc.accumulate(neg);
  CHECK(acc.mean().max_abs() <= 1e-15);

  AverageAccumulator rep;
  for (int i = 0; i < 5; ++i) rep.accumulate(c);
  CHECK((rep.mean() - c.c).max_abs() <= 1e-12);

  AverageAccumulator merged = AverageAccumulator::merged(acc, rep);
  CHECK(merged.count() == 7);

  CrossCorrelation wrong;
  wrong.c = Matrix(2, 2);
  CHECK_THROWS_AS(acc.accumulate(wrong), std::invalid_argument);
  AverageAccumulator empty;
  CHECK_THROWS_AS(empty.mean(), std::runtime_error);
}

TEST_CASE("wmse_loss fixed points") {
  Rng rng(29);
  Matrix z = testutil::random_matrix(rng, 24, 6);
  double same = wmse_loss(EmbeddingBatch(z), EmbeddingBatch(z), 1e-6).loss;
  CHECK(std::fabs(same) <= 1e-10);

  // negated view whitens to the exact antipode: per-row distance^2 is 4
  Matrix neg = z;
  neg *= -1.0;
  double anti = wmse_loss(EmbeddingBatch(z), EmbeddingBatch(neg), 1e-6).loss;
  CHECK(anti == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("wmse_loss_grad matches finite differences") {
  Rng rng(31);
  const double jitter = 1e-3;
  for (int trial = 0; trial < 10; ++trial) {
    Matrix za = testutil::random_matrix(rng, 24, 6, 1.0, 0.2);
    Matrix zb = testutil::random_matrix(rng, 24, 6, 0.8, -0.1);
    WmseGrad g = wmse_loss_grad(EmbeddingBatch(za), EmbeddingBatch(zb), jitter);
    auto loss_a = [&](const Matrix& x) {
      return wmse_loss(EmbeddingBatch(x), EmbeddingBatch(zb), jitter).loss;
    };
    auto loss_b = [&](const Matrix& x) {
      return wmse_loss(EmbeddingBatch(za), EmbeddingBatch(x), jitter).loss;
    };
    CHECK(testutil::rel_err_inf(g.dza, testutil::fd_gradient(loss_a, za)) <= 1e-4);
    CHECK(testutil::rel_err_inf(g.dzb, testutil::fd_gradient(loss_b, zb)) <= 1e-4);
  }
}

TEST_CASE("wmse_variant_loss reductions and gradient") {
  Rng rng(37);
  const double jitter = 1e-3;
  BtLossConfig cfg;
  cfg.lambda = 0.1;

  Matrix za = testutil::random_matrix(rng, 24, 6);
  Matrix zb = testutil::random_matrix(rng, 24, 6);
  EmbeddingBatch a(za), b(zb);

  // lambda = 0 reduces to plain wmse
  BtLossConfig zero_cfg;
  zero_cfg.lambda = 0.0;
  double plain = wmse_loss(a, b, jitter).loss;
  double withz = wmse_variant_loss(a, b, zero_cfg,
                                   sample_gaussian_target(6, 1.0, 5), jitter)
                     .loss;
  CHECK(withz == doctest::Approx(plain).epsilon(1e-12));

  // a target matching the whitened correlation exactly also reduces to wmse
  WmseResult base = wmse_loss(a, b, jitter);
  Matrix match = base.corr.c;
  for (std::size_t i = 0; i < 6; ++i) match(i, i) = 0.0;
  double matched = wmse_variant_loss(a, b, cfg,
                                     OffDiagonalTarget::average(match), jitter)
                       .loss;
  CHECK(matched == doctest::Approx(plain).epsilon(1e-10));

  // finite differences for both target kinds
  for (TargetKind kind : {TargetKind::Gaussian, TargetKind::Average}) {
    for (int trial = 0; trial < 5; ++trial) {
      Matrix xa = testutil::random_matrix(rng, 24, 6, 1.1, 0.1);
      Matrix xb = testutil::random_matrix(rng, 24, 6, 0.9, -0.3);
      OffDiagonalTarget tgt = random_target(kind, 6, rng);
      WmseGrad g = wmse_variant_loss_grad(EmbeddingBatch(xa), EmbeddingBatch(xb),
                                          cfg, tgt, jitter);
      auto loss_a = [&](const Matrix& x) {
        return wmse_variant_loss(EmbeddingBatch(x), EmbeddingBatch(xb), cfg, tgt,
                                 jitter)
            .loss;
      };
      auto loss_b = [&](const Matrix& x) {
        return wmse_variant_loss(EmbeddingBatch(xa), EmbeddingBatch(x), cfg, tgt,
                                 jitter)
            .loss;
      };
      CHECK(testutil::rel_err_inf(g.dza, testutil::fd_gradient(loss_a, xa)) <= 1e-4);
      CHECK(testutil::rel_err_inf(g.dzb, testutil::fd_gradient(loss_b, xb)) <= 1e-4);
    }
  }
}
