// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 7 drives the CLI binary (path via --bin).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pid_oracle.hpp"
#include "pidssl/eval.hpp"
#include "pidssl/hash.hpp"
#include "pidssl/losses.hpp"
#include "pidssl/network.hpp"
#include "pidssl/pid.hpp"
#include "pidssl/protocol.hpp"
#include "pidssl/rng.hpp"
#include "testutil.hpp"

using namespace pidssl;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Criterion {
 public:
  explicit Criterion(std::string name)
      : name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}

  void check(bool ok, const std::string& detail) {
    if (!ok) failed_.push_back(detail);
  }

  void finish() {
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    if (failed_.empty()) {
      std::printf("criterion %s: PASS (%.1f s)\n", name_.c_str(), secs);
    } else {
      ++g_failures;
      std::printf("criterion %s: FAIL (%.1f s)\n", name_.c_str(), secs);
      for (const std::string& d : failed_) std::printf("    %s\n", d.c_str());
    }
    std::fflush(stdout);
  }

 private:
  std::string name_;
  std::vector<std::string> failed_;
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

JointDistribution from_oracle(const pid_oracle::Table& tb) {
  return JointDistribution(tb.nt, tb.n1, tb.n2, tb.p);
}

// ---------------------------------------------------------------- criterion 1
void criterion_pid_exactness() {
  Criterion cr("1 (pid exactness: xor/copy/and)");

  PidDecomposition x =
      decompose(from_oracle(pid_oracle::gate_table(pid_oracle::xor_gate)));
  cr.check(std::fabs(x.synergy - 1.0) <= 1e-9,
           fmt("xor synergy %.12f != 1", x.synergy));
  cr.check(std::fabs(x.redundancy) <= 1e-9 && std::fabs(x.unique_s1) <= 1e-9 &&
               std::fabs(x.unique_s2) <= 1e-9,
           "xor non-synergy components above 1e-9");

  PidDecomposition c = decompose(from_oracle(pid_oracle::copy_table()));
  cr.check(std::fabs(c.redundancy - 1.0) <= 1e-9,
           fmt("copy redundancy %.12f != 1", c.redundancy));
  cr.check(std::fabs(c.synergy) <= 1e-9 && std::fabs(c.unique_s1) <= 1e-9 &&
               std::fabs(c.unique_s2) <= 1e-9,
           "copy non-redundancy components above 1e-9");

  pid_oracle::Table and_tb = pid_oracle::gate_table(pid_oracle::and_gate);
  PidDecomposition a = decompose(from_oracle(and_tb));
  pid_oracle::Decomp oracle = pid_oracle::decompose(and_tb);
  cr.check(std::fabs(a.redundancy - oracle.red) <= 1e-12 &&
               std::fabs(a.synergy - oracle.syn) <= 1e-12,
           "and: library disagrees with the enumeration oracle");
  cr.check(std::fabs(a.redundancy - 0.3113) <= 5e-5,
           fmt("and redundancy %.6f, want 0.3113", a.redundancy));
  cr.check(std::fabs(a.synergy - 0.5) <= 5e-5,
           fmt("and synergy %.6f, want 0.5000", a.synergy));
  cr.check(std::fabs(a.unique_s1) <= 1e-9 && std::fabs(a.unique_s2) <= 1e-9,
           "and unique components above 1e-9");
  cr.finish();
}

// ---------------------------------------------------------------- criterion 2
void criterion_pid_properties() {
  Criterion cr("2 (pid property suite: 1000 dirichlet tables)");
  Rng rng(0xACCE);
  int bad_nonneg = 0, bad_sum = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t nt = 2 + rng.below(3), n1 = 2 + rng.below(3),
                n2 = 2 + rng.below(3);
    std::vector<double> p(nt * n1 * n2);
    double sum = 0.0;
    for (double& v : p) {
      v = -std::log(1.0 - rng.uniform());
      sum += v;
    }
    for (double& v : p) v /= sum;
    PidDecomposition d = decompose(JointDistribution(nt, n1, n2, std::move(p)));
    if (d.redundancy < -1e-12 || d.unique_s1 < -1e-12 ||
        d.unique_s2 < -1e-12 || d.synergy < -1e-12)
      ++bad_nonneg;
    if (std::fabs(d.redundancy + d.unique_s1 + d.unique_s2 + d.synergy -
                  d.joint_mi) > 1e-9)
      ++bad_sum;
  }
  cr.check(bad_nonneg == 0, fmt("%.0f tables with a negative component",
                                static_cast<double>(bad_nonneg)));
  cr.check(bad_sum == 0, fmt("%.0f tables violating the sum identity",
                             static_cast<double>(bad_sum)));
  cr.finish();
}

// ---------------------------------------------------------------- criterion 3
OffDiagonalTarget make_target(TargetKind kind, std::size_t d, Rng& rng) {
  if (kind == TargetKind::Zero) return OffDiagonalTarget::zero();
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (i != j)
        m(i, j) = kind == TargetKind::Gaussian ? rng.normal() : rng.uniform(-1, 1);
  return kind == TargetKind::Gaussian ? OffDiagonalTarget::gaussian(m)
                                      : OffDiagonalTarget::average(m);
}

void criterion_gradient_oracle() {
  Criterion cr("3 (gradient oracle: 100 instances vs central differences)");
  Rng rng(0x6AD);
  double worst_loss = 0.0, worst_e2e = 0.0;

  // 30 bt instances, 10 per target kind
  BtLossConfig cfg;
  cfg.lambda = 0.1;
  for (TargetKind kind :
       {TargetKind::Zero, TargetKind::Gaussian, TargetKind::Average}) {
    for (int trial = 0; trial < 10; ++trial) {
      Matrix za = testutil::random_matrix(rng, 16, 8, 1.0, 0.2);
      Matrix zb = testutil::random_matrix(rng, 16, 8, 1.1, -0.1);
      OffDiagonalTarget tgt = make_target(kind, 8, rng);
      BtLossGrad g = bt_loss_grad(EmbeddingBatch(za), EmbeddingBatch(zb), cfg, tgt);
      auto fa = [&](const Matrix& x) {
        return bt_loss(EmbeddingBatch(x), EmbeddingBatch(zb), cfg, tgt).loss;
      };
      auto fb = [&](const Matrix& x) {
        return bt_loss(EmbeddingBatch(za), EmbeddingBatch(x), cfg, tgt).loss;
      };
      worst_loss = std::max(
          {worst_loss, testutil::rel_err_inf(g.dza, testutil::fd_gradient(fa, za)),
           testutil::rel_err_inf(g.dzb, testutil::fd_gradient(fb, zb))});
    }
  }

  // 20 wmse instances
  const double jitter = 1e-3;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix za = testutil::random_matrix(rng, 24, 6, 1.0, 0.1);
    Matrix zb = testutil::random_matrix(rng, 24, 6, 0.9, -0.2);
    WmseGrad g = wmse_loss_grad(EmbeddingBatch(za), EmbeddingBatch(zb), jitter);
    auto fa = [&](const Matrix& x) {
      return wmse_loss(EmbeddingBatch(x), EmbeddingBatch(zb), jitter).loss;
    };
    auto fb = [&](const Matrix& x) {
      return wmse_loss(EmbeddingBatch(za), EmbeddingBatch(x), jitter).loss;
    };
    worst_loss = std::max(
        {worst_loss, testutil::rel_err_inf(g.dza, testutil::fd_gradient(fa, za)),
         testutil::rel_err_inf(g.dzb, testutil::fd_gradient(fb, zb))});
  }

  // 20 wmse variant instances, 10 per target kind
  for (TargetKind kind : {TargetKind::Gaussian, TargetKind::Average}) {
    for (int trial = 0; trial < 10; ++trial) {
      Matrix za = testutil::random_matrix(rng, 24, 6, 1.0, 0.1);
      Matrix zb = testutil::random_matrix(rng, 24, 6, 1.2, 0.3);
      OffDiagonalTarget tgt = make_target(kind, 6, rng);
      WmseGrad g = wmse_variant_loss_grad(EmbeddingBatch(za), EmbeddingBatch(zb),
                                          cfg, tgt, jitter);
      auto fa = [&](const Matrix& x) {
        return wmse_variant_loss(EmbeddingBatch(x), EmbeddingBatch(zb), cfg, tgt,
                                 jitter)
            .loss;
      };
      auto fb = [&](const Matrix& x) {
        return wmse_variant_loss(EmbeddingBatch(za), EmbeddingBatch(x), cfg, tgt,
                                 jitter)
            .loss;
      };
      worst_loss = std::max(
          {worst_loss, testutil::rel_err_inf(g.dza, testutil::fd_gradient(fa, za)),
           testutil::rel_err_inf(g.dzb, testutil::fd_gradient(fb, zb))});
    }
  }
  cr.check(worst_loss <= 1e-4,
           fmt("worst loss-gradient relative error %.3e > 1e-4", worst_loss));

  // 30 end-to-end instances: bt_loss through a 2-layer net, n=8, d=4
  for (int trial = 0; trial < 30; ++trial) {
    MlpSpec spec;
    spec.layer_widths = {6, 8, 4};
    spec.encoder_cut = 1;
    spec.activation = trial % 2 == 0 ? Activation::Relu : Activation::Tanh;
    ModelParams params = init_params(spec, 100 + trial);
    Matrix x1 = testutil::random_matrix(rng, 8, 6);
    Matrix x2 = testutil::random_matrix(rng, 8, 6);
    OffDiagonalTarget tgt = make_target(
        trial % 3 == 0   ? TargetKind::Zero
        : trial % 3 == 1 ? TargetKind::Gaussian
                         : TargetKind::Average,
        4, rng);

    ForwardCache c1, c2;
    ForwardResult f1 = forward(spec, params, x1, &c1);
    ForwardResult f2 = forward(spec, params, x2, &c2);
    BtLossGrad lg = bt_loss_grad(EmbeddingBatch(f1.embeddings),
                                 EmbeddingBatch(f2.embeddings), cfg, tgt);
    ModelGrads analytic = backward(spec, params, c1, lg.dza);
    grads_accumulate(analytic, backward(spec, params, c2, lg.dzb));

    std::vector<double> ga;
    for (const Matrix& w : analytic.weights)
      for (double v : w.raw()) ga.push_back(v);
    for (const auto& b : analytic.biases)
      for (double v : b) ga.push_back(v);

    auto loss = [&]() {
      ForwardResult r1 = forward(spec, params, x1);
      ForwardResult r2 = forward(spec, params, x2);
      return bt_loss(EmbeddingBatch(r1.embeddings), EmbeddingBatch(r2.embeddings),
                     cfg, tgt)
          .loss;
    };
    std::vector<double*> slots;
    for (Matrix& w : params.weights)
      for (double& v : w.raw()) slots.push_back(&v);
    for (auto& b : params.biases)
      for (double& v : b) slots.push_back(&v);

    const double h = 1e-5;
    double num = 0.0, den = 1e-8;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      double orig = *slots[i];
      *slots[i] = orig + h;
      double fp = loss();
      *slots[i] = orig - h;
      double fm = loss();
      *slots[i] = orig;
      double fd = (fp - fm) / (2 * h);
      num = std::max(num, std::fabs(ga[i] - fd));
      den = std::max(den, std::fabs(fd));
    }
    worst_e2e = std::max(worst_e2e, num / den);
  }
  cr.check(worst_e2e <= 1e-3,
           fmt("worst end-to-end relative error %.3e > 1e-3", worst_e2e));
  cr.finish();
}

// ---------------------------------------------------------------- criterion 4
void criterion_whitening() {
  Criterion cr("4 (whitening invariant: 100 random batches)");
  Rng rng(0xA4);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t d = 1 + rng.below(8);
    std::size_t n = 4 * d + rng.below(24);
    Matrix m = testutil::random_matrix(rng, n, d, 1.0 + 2.0 * rng.uniform(),
                                       rng.uniform(-2, 2));
    EmbeddingBatch w = whiten_cholesky(EmbeddingBatch(m), 0.0);
    Matrix cov = covariance(w);
    worst = std::max(worst, (cov - Matrix::identity(d)).max_abs());
  }
  cr.check(worst <= 1e-6, fmt("worst ||cov - I||_inf = %.3e > 1e-6", worst));
  cr.finish();
}

// ---------------------------------------------------------------- criterion 5
void criterion_loss_fixed_points() {
  Criterion cr("5 (loss fixed points)");
  // centered orthogonal equal-norm columns: C = I exactly
  Matrix m(4, 2);
  double c1[] = {1, -1, 1, -1}, c2[] = {1, 1, -1, -1};
  for (int r = 0; r < 4; ++r) {
    m(r, 0) = c1[r];
    m(r, 1) = c2[r];
  }
  BtLossConfig cfg;
  BtLossResult at_min = bt_loss(EmbeddingBatch(m), EmbeddingBatch(m), cfg,
                                OffDiagonalTarget::zero());
  cr.check(std::fabs(at_min.loss) <= 1e-10,
           fmt("loss at C = I with zero target: %.3e > 1e-10", at_min.loss));

  Rng rng(0xA5);
  Matrix za = testutil::random_matrix(rng, 16, 5);
  Matrix zb = testutil::random_matrix(rng, 16, 5);
  BtLossResult base = bt_loss(EmbeddingBatch(za), EmbeddingBatch(zb), cfg,
                              OffDiagonalTarget::zero());
  Matrix g = base.corr.c;
  for (std::size_t i = 0; i < 5; ++i) g(i, i) = 0.0;
  BtLossResult matched = bt_loss(EmbeddingBatch(za), EmbeddingBatch(zb), cfg,
                                 OffDiagonalTarget::gaussian(g));
  cr.check(matched.term_offdiag <= 1e-10,
           fmt("matched off-diagonal term %.3e > 1e-10", matched.term_offdiag));
  cr.check(std::fabs(matched.loss - matched.term_diag) <= 1e-10,
           "matched-target loss is not the diagonal term alone");
  cr.finish();
}

// ---------------------------------------------------------------- criterion 6
struct FamilyOutcome {
  double mean_gap = 0.0;      // standard minus heavy, phase 1
  double mean_dg = 0.0;       // gaussian-variant phase 2 minus heavy phase 1
  double mean_dr = 0.0;       // average-variant phase 2 minus heavy phase 1
  std::vector<std::string> lines;
};

TrainRun desk_run(const std::string& loss, std::uint64_t seed,
                  const std::string& out_dir) {
  TrainRun run;
  run.seed = seed;
  run.out_dir = out_dir;
  run.dataset.kind = "synthetic";
  run.dataset.classes = 4;
  run.dataset.per_class = 500;  // 2000 samples total
  run.dataset.h = 16;
  run.dataset.w = 16;
  run.dataset.c = 1;
  run.dataset.snr = 0.30;
  run.dataset.seed = 1234;
  run.train_fraction = 0.7;
  run.model.layer_widths = {256, 64, 32, 64, 16};
  run.model.encoder_cut = 2;
  run.phase1.epochs = 50;
  run.phase1.batch_size = 128;
  run.phase1.lr_schedule = parse_lr_schedule("0:0.01,5:0.001");
  run.phase1.loss = loss;
  run.phase1.lambda = loss == "bt" ? 0.1 : 5e-3;
  run.phase2 = run.phase1;
  run.phase2.variant = "gaussian";
  run.phase2.lambda = loss == "bt" ? 0.1 : 0.05;
  run.phase2.sigma = 1.0;
  run.phase2.lr_schedule = parse_lr_schedule("0:0.001");
  run.diag_every = 0;
  return run;
}

FamilyOutcome run_family(const std::string& loss, const std::string& scratch) {
  FamilyOutcome out;
  ProbeConfig pcfg;
  pcfg.epochs = 40;
  pcfg.batch_size = 128;
  pcfg.lr = 0.05;
  pcfg.seed = 7;

  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    TrainRun run = desk_run(loss, seed, scratch);
    std::vector<ImageSample> data = load_dataset(run.dataset);
    DatasetSplit split = split_dataset(data, run.train_fraction);
    auto probe = [&](const ModelParams& p) {
      return linear_probe(run.model, p, split.train, split.test, pcfg);
    };

    PhaseOutcome p1_std = pretrain_phase1(run, split.train);
    double acc_std = probe(p1_std.ckpt.params);

    TrainRun heavy = run;
    heavy.augment_policy = "heavy";
    PhaseOutcome p1_heavy = pretrain_phase1(heavy, split.train);
    double acc_heavy = probe(p1_heavy.ckpt.params);

    OffDiagonalTarget g =
        sample_gaussian_target(run.model.output_dim(), heavy.phase2.sigma, seed);
    PhaseOutcome p2_g = pretrain_phase2(p1_heavy.ckpt, heavy, g, split.train);
    double acc_g = probe(p2_g.ckpt.params);

    TrainRun heavy_avg = heavy;
    heavy_avg.phase2.variant = "average";
    OffDiagonalTarget cave =
        compute_average_c(p1_heavy.ckpt, split.train, heavy.phase2.batch_size,
                          AugmentPolicy::heavy(), seed);
    PhaseOutcome p2_r = pretrain_phase2(p1_heavy.ckpt, heavy_avg, cave, split.train);
    double acc_r = probe(p2_r.ckpt.params);

    out.mean_gap += (acc_std - acc_heavy) / 3.0;
    out.mean_dg += (acc_g - acc_heavy) / 3.0;
    out.mean_dr += (acc_r - acc_heavy) / 3.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%s seed %llu: std %.4f heavy %.4f gaussian %+.4f average %+.4f",
                  loss.c_str(), static_cast<unsigned long long>(seed), acc_std,
                  acc_heavy, acc_g - acc_heavy, acc_r - acc_heavy);
    out.lines.push_back(buf);
  }
  return out;
}

void criterion_directional(const std::string& scratch) {
  Criterion cr("6 (desk-scale directional experiment, 3 seeds)");

  FamilyOutcome bt = run_family("bt", scratch + "/bt");
  for (const std::string& l : bt.lines) std::printf("    %s\n", l.c_str());
  cr.check(bt.mean_gap >= 0.02,
           fmt("(a) bt standard-minus-heavy gap %.4f < 0.02", bt.mean_gap));
  cr.check(bt.mean_dg >= 0.01,
           fmt("(b) gsbt improvement over heavy phase 1 %.4f < 0.01", bt.mean_dg));
  cr.check(bt.mean_dr >= 0.01,
           fmt("(b) rsbt improvement over heavy phase 1 %.4f < 0.01", bt.mean_dr));

  FamilyOutcome wm = run_family("wmse", scratch + "/wmse");
  for (const std::string& l : wm.lines) std::printf("    %s\n", l.c_str());
  cr.check(wm.mean_gap >= 0.02,
           fmt("(c) wmse standard-minus-heavy gap %.4f < 0.02", wm.mean_gap));
  cr.check(wm.mean_dg >= 0.01,
           fmt("(c) gsw-mse improvement over heavy phase 1 %.4f < 0.01", wm.mean_dg));
  cr.check(wm.mean_dr >= 0.01,
           fmt("(c) rsw-mse improvement over heavy phase 1 %.4f < 0.01", wm.mean_dr));
  cr.finish();
}

// ---------------------------------------------------------------- criterion 7
void criterion_determinism(const std::string& bin, const std::string& scratch) {
  Criterion cr("7 (training determinism via the cli)");
  if (bin.empty()) {
    cr.check(false, "no --bin argument; cannot drive the cli");
    cr.finish();
    return;
  }
  auto write_cfg = [&](const std::string& path, const std::string& out_dir) {
    std::ofstream f(path);
    f << "seed = 11\nout_dir = " << out_dir << "\n"
      << "dataset.kind = synthetic\ndataset.classes = 2\ndataset.per_class = 60\n"
      << "dataset.height = 8\ndataset.width = 8\ndataset.channels = 1\n"
      << "dataset.snr = 1\ndataset.seed = 77\n"
      << "model.widths = 64,16,24,8\nmodel.encoder_cut = 1\n"
      << "phase1.epochs = 3\nphase1.batch_size = 16\nphase1.lr_schedule = 0:0.01\n"
      << "phase2.epochs = 3\nphase2.batch_size = 16\ndiag.every = 0\n";
  };
  std::string cfg_a = scratch + "/det_a.cfg", cfg_b = scratch + "/det_b.cfg";
  write_cfg(cfg_a, scratch + "/det_a");
  write_cfg(cfg_b, scratch + "/det_b");
  int ra = std::system((bin + " pretrain --config " + cfg_a + " > /dev/null").c_str());
  int rb = std::system((bin + " pretrain --config " + cfg_b + " > /dev/null").c_str());
  cr.check(ra == 0 && rb == 0, "cli pretrain invocation failed");
  if (ra == 0 && rb == 0) {
    for (const char* name : {"ckpt_phase1.bin", "ckpt_phase2.bin"}) {
      std::string ha = file_hash_hex(scratch + "/det_a/" + name);
      std::string hb = file_hash_hex(scratch + "/det_b/" + name);
      cr.check(ha == hb, std::string(name) + ": hashes differ (" + ha + " vs " + hb + ")");
    }
  }
  cr.finish();
}

// ---------------------------------------------------------------- criterion 8
void criterion_diagnostic(const std::string& scratch) {
  Criterion cr("8 (pid diagnostic sanity with shuffled-label controls)");
  (void)scratch;
  const std::size_t classes = 4;
  std::vector<ImageSample> data;
  Rng pix_rng(0xD1A6);
  for (std::size_t k = 0; k < classes; ++k)
    for (std::size_t i = 0; i < 500; ++i) {
      ImageSample s;
      s.h = 4;
      s.w = 4;
      s.c = 1;
      s.label = static_cast<int>(k);
      s.pixels.resize(16);
      for (double& v : s.pixels) v = pix_rng.uniform();
      s.pixels[0] = (static_cast<double>(k) + 0.5) / classes;  // oracle pixel
      data.push_back(std::move(s));
    }

  // encoder emitting the label pixel in dimension 0
  MlpSpec spec;
  spec.layer_widths = {16, 4, 8};
  spec.encoder_cut = 1;
  ModelParams params = init_params(spec, 1);
  for (Matrix& w : params.weights)
    for (double& v : w.raw()) v = 0.0;
  params.weights[0](0, 0) = 1.0;

  PidDiagnosticReport rep =
      pid_diagnostic(spec, params, data, AugmentPolicy::identity(), 4, 2, 0xD8);
  double h_t = std::log2(static_cast<double>(classes));
  cr.check(std::fabs(rep.decomposition.redundancy - h_t) <= 0.1,
           fmt("oracle redundancy %.4f not within 0.1 of H(T) = %.4f",
               rep.decomposition.redundancy, h_t));
  cr.check(rep.decomposition.synergy <= rep.control.synergy + 0.05,
           fmt("oracle synergy %.4f above control floor %.4f",
               rep.decomposition.synergy, rep.control.synergy));

  // shuffled labels: every component within the control floor
  std::vector<ImageSample> shuffled = data;
  Rng shuffle_rng(0xD9);
  for (auto& s : shuffled) s.label = static_cast<int>(shuffle_rng.below(classes));
  PidDiagnosticReport ctl =
      pid_diagnostic(spec, params, shuffled, AugmentPolicy::identity(), 4, 2, 0xDA);
  cr.check(ctl.decomposition.redundancy <= ctl.control.redundancy + 0.05,
           fmt("shuffled redundancy %.4f above floor %.4f",
               ctl.decomposition.redundancy, ctl.control.redundancy));
  cr.check(ctl.decomposition.synergy <= ctl.control.synergy + 0.05,
           fmt("shuffled synergy %.4f above floor %.4f", ctl.decomposition.synergy,
               ctl.control.synergy));
  cr.check(ctl.decomposition.unique_s1 <= ctl.control.unique_s1 + 0.05 &&
               ctl.decomposition.unique_s2 <= ctl.control.unique_s2 + 0.05,
           "shuffled unique components above floor");
  cr.check(ctl.decomposition.joint_mi <= ctl.control.joint_mi + 0.05,
           fmt("shuffled joint mi %.4f above floor %.4f", ctl.decomposition.joint_mi,
               ctl.control.joint_mi));
  cr.finish();
}

}  // namespace

int main(int argc, char** argv) {
  std::string bin;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--bin") bin = argv[i + 1];

  testutil::TempDir scratch("acceptance");

  criterion_pid_exactness();
  criterion_pid_properties();
  criterion_gradient_oracle();
  criterion_whitening();
  criterion_loss_fixed_points();
  criterion_directional(scratch.path());
  criterion_determinism(bin, scratch.path());
  criterion_diagnostic(scratch.path());

  if (g_failures == 0)
    std::printf("acceptance: all 8 criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
