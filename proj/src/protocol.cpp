#include "pidssl/protocol.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pidssl/errors.hpp"
#include "pidssl/eval.hpp"
#include "pidssl/hash.hpp"

namespace fs = std::filesystem;

namespace pidssl {

double PhaseConfig::lr_at(std::size_t epoch) const {
  double lr = lr_schedule.front().lr;
  for (const LrPoint& p : lr_schedule)
    if (epoch >= p.start_epoch) lr = p.lr;
  return lr;
}

void PhaseConfig::validate(bool is_phase2) const {
  if (epochs < 1) throw ConfigError("phase: epochs must be >= 1");
  if (batch_size < 2) throw ConfigError("phase: batch_size must be >= 2");
  if (lr_schedule.empty() || lr_schedule.front().start_epoch != 0)
    throw ConfigError("phase: lr schedule must start at epoch 0");
  for (std::size_t i = 1; i < lr_schedule.size(); ++i)
    if (lr_schedule[i].start_epoch <= lr_schedule[i - 1].start_epoch)
      throw ConfigError("phase: lr schedule epochs must increase");
  for (const LrPoint& p : lr_schedule)
    if (p.lr < 0.0) throw ConfigError("phase: negative learning rate");
  if (loss != "bt" && loss != "wmse") throw ConfigError("phase: loss must be bt or wmse");
  if (lambda < 0.0) throw ConfigError("phase: lambda must be >= 0");
  if (is_phase2) {
    if (variant != "gaussian" && variant != "average")
      throw ConfigError("phase2: variant must be gaussian or average");
    if (variant == "gaussian" && !(sigma > 0.0))
      throw ConfigError("phase2: sigma must be > 0");
  } else if (variant != "none") {
    throw ConfigError("phase1: variant must be none");
  }
  if (train_scope != "full" && train_scope != "projector_only")
    throw ConfigError("phase: train_scope must be full or projector_only");
}

void TrainRun::validate() const {
  phase1.validate(false);
  phase2.validate(true);
  model.validate();
  AugmentPolicy::by_name(augment_policy).validate();
  if (out_dir.empty()) throw ConfigError("run: out_dir must be set");
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw ConfigError("run: train_fraction must be in (0, 1)");
}

std::string MetricsRecord::to_json_line() const {
  nlohmann::json j;
  j["phase"] = phase;
  j["epoch"] = epoch;
  j["lr"] = lr;
  j["loss_mean"] = loss_mean;
  j["term_diag"] = term_diag;
  j["term_offdiag"] = term_offdiag;
  j["c_minus_i_fro"] = c_minus_i_fro;
  if (has_pid) {
    j["pid_redundancy"] = pid_redundancy;
    j["pid_synergy"] = pid_synergy;
    j["pid_joint_mi"] = pid_joint_mi;
    j["ctl_redundancy"] = ctl_redundancy;
    j["ctl_synergy"] = ctl_synergy;
    j["ctl_joint_mi"] = ctl_joint_mi;
  }
  return j.dump();
}

std::size_t worker_count() {
  const char* env = std::getenv("PIDSSL_THREADS");
  if (!env) return 1;
  long v = std::strtol(env, nullptr, 10);
  return v < 1 ? 1 : static_cast<std::size_t>(v);
}

namespace {

// Two view matrices for one batch. Per-sample counter-based streams keyed by
// (seed, phase, epoch, dataset index) make worker fan-out equivalent to the
// serial loop.
void build_view_batch(const std::vector<ImageSample>& data,
                      const std::vector<std::uint32_t>& perm, std::size_t start,
                      std::size_t stop, const AugmentPolicy& policy,
                      std::uint64_t seed, std::uint64_t phase, std::uint64_t epoch,
                      Matrix& x1, Matrix& x2) {
  std::size_t bs = stop - start;
  std::size_t dim = data[0].pixels.size();
  x1 = Matrix(bs, dim);
  x2 = Matrix(bs, dim);

  auto fill_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t pos = lo; pos < hi; ++pos) {
      std::size_t idx = perm[start + pos];
      Rng rng = Rng::stream({seed, kStreamAugment, phase, epoch, idx});
      auto views = make_views(data[idx], policy, rng);
      for (std::size_t p = 0; p < dim; ++p) {
        x1(pos, p) = views.first.pixels[p];
        x2(pos, p) = views.second.pixels[p];
      }
    }
  };

  std::size_t workers = std::min(worker_count(), bs);
  if (workers <= 1) {
    fill_range(0, bs);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (bs + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk, hi = std::min(bs, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(fill_range, lo, hi);
  }
  for (auto& t : pool) t.join();
}

double c_minus_i_fro(const Matrix& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) {
      double v = c(i, j) - (i == j ? 1.0 : 0.0);
      s += v * v;
    }
  return std::sqrt(s);
}

double wmse_batch_jitter(const EmbeddingBatch& za, const EmbeddingBatch& zb) {
  return 0.5 * (default_whiten_jitter(za) + default_whiten_jitter(zb));
}

struct PhaseContext {
  int phase_no;
  const PhaseConfig* cfg;
  const OffDiagonalTarget* target;  // null -> Zero target / plain wmse
};

PhaseOutcome train_phase(const TrainRun& run, PhaseContext ctx,
                         ModelParams params, AdamState adam,
                         const std::vector<ImageSample>& data,
                         const std::string& metrics_path) {
  const PhaseConfig& cfg = *ctx.cfg;
  const AugmentPolicy policy = AugmentPolicy::by_name(run.augment_policy);
  std::size_t n = data.size();
  if (n < 2) throw ConfigError("training: need at least 2 samples");

  std::ofstream metrics_out;
  if (!metrics_path.empty()) {
    metrics_out.open(metrics_path, std::ios::trunc);
    if (!metrics_out) throw ConfigError("cannot write metrics log: " + metrics_path);
  }

  std::size_t first_trainable =
      (ctx.phase_no == 2 && cfg.train_scope == "projector_only")
          ? run.model.encoder_cut
          : 0;
  OffDiagonalTarget zero = OffDiagonalTarget::zero();
  const OffDiagonalTarget& target = ctx.target ? *ctx.target : zero;

  PhaseOutcome out;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    adam.lr = cfg.lr_at(epoch);
    Rng shuffle_rng = Rng::stream({run.seed, kStreamShuffle,
                                   static_cast<std::uint64_t>(ctx.phase_no), epoch});
    std::vector<std::uint32_t> perm =
        shuffle_rng.permutation(static_cast<std::uint32_t>(n));

    MetricsRecord rec;
    rec.phase = ctx.phase_no;
    rec.epoch = epoch;
    rec.lr = adam.lr;
    std::size_t batches = 0;

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      std::size_t stop = std::min(n, start + cfg.batch_size);
      if (stop - start < 2) break;  // whitening and correlations need >= 2 rows

      Matrix x1, x2;
      build_view_batch(data, perm, start, stop, policy, run.seed,
                       static_cast<std::uint64_t>(ctx.phase_no), epoch, x1, x2);

      ForwardCache cache1, cache2;
      ForwardResult f1 = forward(run.model, params, x1, &cache1);
      ForwardResult f2 = forward(run.model, params, x2, &cache2);
      if (!f1.embeddings.all_finite() || !f2.embeddings.all_finite())
        throw DivergenceError("non-finite embeddings at phase " +
                              std::to_string(ctx.phase_no) + " epoch " +
                              std::to_string(epoch) + " batch " +
                              std::to_string(batches));
      EmbeddingBatch za(std::move(f1.embeddings));
      EmbeddingBatch zb(std::move(f2.embeddings));

      double loss, tdiag, toff, cfro;
      Matrix dza, dzb;
      if (cfg.loss == "bt") {
        BtLossConfig lcfg{cfg.lambda, 1e-5};
        BtLossGrad g = bt_loss_grad(za, zb, lcfg, target);
        loss = g.value.loss;
        tdiag = g.value.term_diag;
        toff = g.value.term_offdiag;
        cfro = c_minus_i_fro(g.value.corr.c);
        dza = std::move(g.dza);
        dzb = std::move(g.dzb);
      } else {
        double jitter = wmse_batch_jitter(za, zb);
        WmseGrad g = ctx.target == nullptr
                         ? wmse_loss_grad(za, zb, jitter)
                         : wmse_variant_loss_grad(za, zb,
                                                  BtLossConfig{cfg.lambda, 1e-5},
                                                  target, jitter);
        loss = g.value.loss;
        tdiag = g.value.term_mse;
        toff = g.value.term_offdiag;
        cfro = c_minus_i_fro(g.value.corr.c);
        dza = std::move(g.dza);
        dzb = std::move(g.dzb);
      }

      if (!std::isfinite(loss))
        throw DivergenceError("non-finite loss at phase " +
                              std::to_string(ctx.phase_no) + " epoch " +
                              std::to_string(epoch) + " batch " +
                              std::to_string(batches));

      ModelGrads grads = backward(run.model, params, cache1, dza);
      grads_accumulate(grads, backward(run.model, params, cache2, dzb));
      adam_step(params, grads, adam, first_trainable);

      rec.loss_mean += loss;
      rec.term_diag += tdiag;
      rec.term_offdiag += toff;
      rec.c_minus_i_fro += cfro;
      ++batches;
    }

    if (batches == 0) throw ConfigError("training: batch size exceeds dataset");
    rec.loss_mean /= static_cast<double>(batches);
    rec.term_diag /= static_cast<double>(batches);
    rec.term_offdiag /= static_cast<double>(batches);
    rec.c_minus_i_fro /= static_cast<double>(batches);

    if (!params.all_finite())
      throw DivergenceError("non-finite parameters after phase " +
                            std::to_string(ctx.phase_no) + " epoch " +
                            std::to_string(epoch));

    if (run.diag_every > 0 && (epoch + 1) % run.diag_every == 0) {
      std::uint64_t diag_seed =
          Rng::stream({run.seed, kStreamDiag,
                       static_cast<std::uint64_t>(ctx.phase_no), epoch})
              .next();
      PidDiagnosticReport rep =
          pid_diagnostic(run.model, params, data, policy, run.diag_bins,
                         run.diag_dims, diag_seed);
      rec.has_pid = true;
      rec.pid_redundancy = rep.decomposition.redundancy;
      rec.pid_synergy = rep.decomposition.synergy;
      rec.pid_joint_mi = rep.decomposition.joint_mi;
      rec.ctl_redundancy = rep.control.redundancy;
      rec.ctl_synergy = rep.control.synergy;
      rec.ctl_joint_mi = rep.control.joint_mi;
    }

    if (metrics_out) metrics_out << rec.to_json_line() << "\n";
    out.metrics.push_back(rec);
  }

  out.ckpt.spec = run.model;
  out.ckpt.params = std::move(params);
  out.ckpt.adam = std::move(adam);
  out.ckpt.seed = run.seed;
  out.ckpt.phase = static_cast<std::uint32_t>(ctx.phase_no);
  out.ckpt.epochs_completed = cfg.epochs;
  if (ctx.target != nullptr) {
    out.ckpt.has_target = true;
    out.ckpt.target_kind = ctx.target->kind();
    out.ckpt.target_matrix = ctx.target->matrix();
  }
  return out;
}

}  // namespace

PhaseOutcome pretrain_phase1(const TrainRun& run,
                             const std::vector<ImageSample>& train_data,
                             const std::string& metrics_path) {
  run.validate();
  ModelParams params = init_params(run.model, run.seed);
  AdamState adam = AdamState::init(params);
  PhaseContext ctx{1, &run.phase1, nullptr};
  return train_phase(run, ctx, std::move(params), std::move(adam), train_data,
                     metrics_path);
}

OffDiagonalTarget compute_average_c(const Checkpoint& ckpt,
                                    const std::vector<ImageSample>& data,
                                    std::size_t batch_size,
                                    const AugmentPolicy& policy,
                                    std::uint64_t aug_seed) {
  if (batch_size < 2) throw ConfigError("compute_average_c: batch_size must be >= 2");
  std::size_t n = data.size();
  AverageAccumulator acc;
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);

  for (std::size_t start = 0; start < n; start += batch_size) {
    std::size_t stop = std::min(n, start + batch_size);
    if (stop - start < 2) break;
    Matrix x1, x2;
    // Phase tag 0 marks the statistics pass; weights stay frozen.
    build_view_batch(data, order, start, stop, policy, aug_seed, 0, 0, x1, x2);
    ForwardResult f1 = forward(ckpt.spec, ckpt.params, x1);
    ForwardResult f2 = forward(ckpt.spec, ckpt.params, x2);
    CrossCorrelation corr = cross_correlation(
        EmbeddingBatch(std::move(f1.embeddings)),
        EmbeddingBatch(std::move(f2.embeddings)), 1e-5);
    acc.accumulate(corr);
  }
  if (acc.count() == 0)
    throw ConfigError("compute_average_c: dataset yields fewer than 1 batch");
  return OffDiagonalTarget::average(acc.mean());
}

PhaseOutcome pretrain_phase2(const Checkpoint& phase1_ckpt, const TrainRun& run,
                             const OffDiagonalTarget& target,
                             const std::vector<ImageSample>& train_data,
                             const std::string& metrics_path) {
  run.validate();
  if ((run.phase2.variant == "gaussian" && target.kind() != TargetKind::Gaussian) ||
      (run.phase2.variant == "average" && target.kind() != TargetKind::Average))
    throw ConfigError("pretrain_phase2: target kind does not match variant");
  target.require_dim(run.model.output_dim());

  // Phase 2 resumes from the phase-1 weights; optimizer moments start fresh.
  ModelParams params = phase1_ckpt.params;
  AdamState adam = AdamState::init(params);
  adam.weight_decay = phase1_ckpt.adam.weight_decay;
  PhaseContext ctx{2, &run.phase2, &target};
  return train_phase(run, ctx, std::move(params), std::move(adam), train_data,
                     metrics_path);
}

namespace {

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << text;
}

std::string target_to_text(const OffDiagonalTarget& t) {
  std::ostringstream os;
  os.precision(17);
  os << (t.kind() == TargetKind::Gaussian ? "gaussian" : "average") << " "
     << t.matrix().rows() << "\n";
  for (std::size_t i = 0; i < t.matrix().rows(); ++i) {
    for (std::size_t j = 0; j < t.matrix().cols(); ++j)
      os << (j ? " " : "") << t.matrix()(i, j);
    os << "\n";
  }
  return os.str();
}

}  // namespace

RunArtifacts run_protocol(const TrainRun& run) {
  run.validate();
  fs::create_directories(run.out_dir);

  RunArtifacts art;
  art.out_dir = run.out_dir;
  art.phase1_checkpoint = run.out_dir + "/ckpt_phase1.bin";
  art.phase2_checkpoint = run.out_dir + "/ckpt_phase2.bin";
  art.manifest_path = run.out_dir + "/manifest.json";

  // Config echo precedes all other side effects.
  write_text_file(run.out_dir + "/config.resolved", render_train_run(run).render());

  std::vector<ImageSample> all = load_dataset(run.dataset);
  DatasetSplit split = split_dataset(all, run.train_fraction);

  nlohmann::json manifest;
  manifest["seed"] = run.seed;
  manifest["variant"] = run.phase2.variant;
  manifest["augment_policy"] = run.augment_policy;
  auto add_artifact = [&](const std::string& path, bool complete) {
    nlohmann::json a;
    a["path"] = fs::path(path).filename().string();
    a["complete"] = complete;
    if (complete) a["fnv1a64"] = file_hash_hex(path);
    manifest["artifacts"].push_back(a);
  };
  auto flush_manifest = [&](int aborted_phase) {
    if (aborted_phase > 0) manifest["aborted_phase"] = aborted_phase;
    write_text_file(art.manifest_path, manifest.dump(2) + "\n");
  };

  Checkpoint p1;
  art.phase1_reused = false;
  if (fs::exists(art.phase1_checkpoint)) {
    try {
      p1 = load_checkpoint(art.phase1_checkpoint);
      art.phase1_reused = p1.phase == 1 && p1.seed == run.seed;
    } catch (const std::exception&) {
      art.phase1_reused = false;
    }
  }
  if (!art.phase1_reused) {
    try {
      PhaseOutcome o = pretrain_phase1(run, split.train,
                                       run.out_dir + "/metrics_phase1.jsonl");
      p1 = std::move(o.ckpt);
    } catch (const DivergenceError&) {
      add_artifact(run.out_dir + "/config.resolved", true);
      flush_manifest(1);
      throw;
    }
    save_checkpoint(art.phase1_checkpoint, p1);
  }

  OffDiagonalTarget target = OffDiagonalTarget::zero();
  std::string target_path = run.out_dir + "/target_phase2.txt";
  if (run.phase2.variant == "gaussian") {
    // The Gaussian variant needs no statistics pass.
    target = sample_gaussian_target(run.model.output_dim(), run.phase2.sigma,
                                    run.seed);
  } else {
    target = compute_average_c(p1, split.train, run.phase2.batch_size,
                               AugmentPolicy::by_name(run.augment_policy),
                               run.seed);
  }
  write_text_file(target_path, target_to_text(target));

  Checkpoint p2;
  art.phase2_reused = false;
  if (fs::exists(art.phase2_checkpoint)) {
    try {
      p2 = load_checkpoint(art.phase2_checkpoint);
      art.phase2_reused = p2.phase == 2 && p2.seed == run.seed;
    } catch (const std::exception&) {
      art.phase2_reused = false;
    }
  }
  if (!art.phase2_reused) {
    try {
      PhaseOutcome o = pretrain_phase2(p1, run, target, split.train,
                                       run.out_dir + "/metrics_phase2.jsonl");
      p2 = std::move(o.ckpt);
    } catch (const DivergenceError&) {
      add_artifact(run.out_dir + "/config.resolved", true);
      add_artifact(art.phase1_checkpoint, true);
      add_artifact(target_path, true);
      flush_manifest(2);
      throw;
    }
    save_checkpoint(art.phase2_checkpoint, p2);
  }

  add_artifact(run.out_dir + "/config.resolved", true);
  add_artifact(art.phase1_checkpoint, true);
  add_artifact(target_path, true);
  add_artifact(art.phase2_checkpoint, true);
  if (fs::exists(run.out_dir + "/metrics_phase1.jsonl"))
    add_artifact(run.out_dir + "/metrics_phase1.jsonl", true);
  if (fs::exists(run.out_dir + "/metrics_phase2.jsonl"))
    add_artifact(run.out_dir + "/metrics_phase2.jsonl", true);
  flush_manifest(0);
  return art;
}

std::vector<LrPoint> parse_lr_schedule(const std::string& text) {
  std::vector<LrPoint> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    std::size_t colon = tok.find(':');
    if (colon == std::string::npos)
      throw ConfigError("lr schedule entry must be epoch:lr, got: " + tok);
    try {
      std::size_t epoch = static_cast<std::size_t>(std::stoull(tok.substr(0, colon)));
      double lr = std::stod(tok.substr(colon + 1));
      out.push_back({epoch, lr});
    } catch (const ConfigError&) {
      throw;
    } catch (...) {
      throw ConfigError("bad lr schedule entry: " + tok);
    }
  }
  if (out.empty()) throw ConfigError("empty lr schedule");
  return out;
}

std::string format_lr_schedule(const std::vector<LrPoint>& sched) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < sched.size(); ++i)
    os << (i ? "," : "") << sched[i].start_epoch << ":" << sched[i].lr;
  return os.str();
}

DatasetSource dataset_source_from_config(const Config& cfg) {
  DatasetSource src;
  src.kind = cfg.get_string("dataset.kind", "synthetic");
  src.path = cfg.get_string("dataset.path", "");
  src.labels_path = cfg.get_string("dataset.labels_path", "");
  src.h = static_cast<std::size_t>(cfg.get_uint("dataset.height", 16));
  src.w = static_cast<std::size_t>(cfg.get_uint("dataset.width", 16));
  src.c = static_cast<std::size_t>(cfg.get_uint("dataset.channels", 1));
  src.classes = static_cast<std::size_t>(cfg.get_uint("dataset.classes", 4));
  src.per_class = static_cast<std::size_t>(cfg.get_uint("dataset.per_class", 500));
  src.snr = cfg.get_double("dataset.snr", 5.0);
  src.seed = cfg.get_uint("dataset.seed", 1234);
  return src;
}

namespace {

PhaseConfig phase_from_config(const Config& cfg, const std::string& prefix,
                              bool is_phase2) {
  PhaseConfig p;
  if (is_phase2) {
    p.lambda = 0.1;
    p.variant = "gaussian";
    p.lr_schedule = parse_lr_schedule("0:0.001");
  } else {
    p.lr_schedule = parse_lr_schedule("0:0.15,2:0.001");
  }
  p.epochs = static_cast<std::size_t>(cfg.get_uint(prefix + ".epochs", p.epochs));
  p.batch_size =
      static_cast<std::size_t>(cfg.get_uint(prefix + ".batch_size", p.batch_size));
  if (cfg.has(prefix + ".lr_schedule"))
    p.lr_schedule = parse_lr_schedule(cfg.get_string(prefix + ".lr_schedule"));
  p.loss = cfg.get_string(prefix + ".loss", p.loss);
  p.variant = cfg.get_string(prefix + ".variant", p.variant);
  p.lambda = cfg.get_double(prefix + ".lambda", p.lambda);
  p.sigma = cfg.get_double(prefix + ".sigma", p.sigma);
  p.train_scope = cfg.get_string(prefix + ".train_scope", p.train_scope);
  return p;
}

const std::vector<std::string> kRunKeys = {
    "seed", "out_dir", "train_fraction", "augment.policy",
    "dataset.kind", "dataset.path", "dataset.labels_path", "dataset.height",
    "dataset.width", "dataset.channels", "dataset.classes", "dataset.per_class",
    "dataset.snr", "dataset.seed",
    "model.widths", "model.activation", "model.encoder_cut",
    "phase1.epochs", "phase1.batch_size", "phase1.lr_schedule", "phase1.loss",
    "phase1.variant", "phase1.lambda", "phase1.sigma", "phase1.train_scope",
    "phase2.epochs", "phase2.batch_size", "phase2.lr_schedule", "phase2.loss",
    "phase2.variant", "phase2.lambda", "phase2.sigma", "phase2.train_scope",
    "diag.every", "diag.bins", "diag.dims"};

}  // namespace

TrainRun train_run_from_config(const Config& cfg) {
  cfg.require_known_keys(kRunKeys);
  TrainRun run;
  run.seed = cfg.get_uint("seed", 1);
  run.out_dir = cfg.get_string("out_dir", "");
  run.train_fraction = cfg.get_double("train_fraction", 0.8);
  run.augment_policy = cfg.get_string("augment.policy", "standard");
  run.dataset = dataset_source_from_config(cfg);

  run.model.layer_widths = cfg.has("model.widths")
                               ? cfg.get_size_list("model.widths")
                               : std::vector<std::size_t>{256, 32, 128, 16};
  std::string act = cfg.get_string("model.activation", "relu");
  if (act == "relu")
    run.model.activation = Activation::Relu;
  else if (act == "tanh")
    run.model.activation = Activation::Tanh;
  else
    throw ConfigError("model.activation must be relu or tanh");
  run.model.encoder_cut = static_cast<std::size_t>(cfg.get_uint("model.encoder_cut", 1));

  run.phase1 = phase_from_config(cfg, "phase1", false);
  run.phase2 = phase_from_config(cfg, "phase2", true);
  run.diag_every = static_cast<std::size_t>(cfg.get_uint("diag.every", 10));
  run.diag_bins = static_cast<int>(cfg.get_int("diag.bins", 4));
  run.diag_dims = static_cast<std::size_t>(cfg.get_uint("diag.dims", 2));
  run.validate();
  return run;
}

Config render_train_run(const TrainRun& run) {
  Config cfg;
  auto set_u = [&](const std::string& k, std::uint64_t v) {
    cfg.set(k, std::to_string(v));
  };
  auto set_d = [&](const std::string& k, double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    cfg.set(k, os.str());
  };
  set_u("seed", run.seed);
  cfg.set("out_dir", run.out_dir);
  set_d("train_fraction", run.train_fraction);
  cfg.set("augment.policy", run.augment_policy);

  cfg.set("dataset.kind", run.dataset.kind);
  if (!run.dataset.path.empty()) cfg.set("dataset.path", run.dataset.path);
  if (!run.dataset.labels_path.empty())
    cfg.set("dataset.labels_path", run.dataset.labels_path);
  set_u("dataset.height", run.dataset.h);
  set_u("dataset.width", run.dataset.w);
  set_u("dataset.channels", run.dataset.c);
  set_u("dataset.classes", run.dataset.classes);
  set_u("dataset.per_class", run.dataset.per_class);
  set_d("dataset.snr", run.dataset.snr);
  set_u("dataset.seed", run.dataset.seed);

  std::ostringstream widths;
  for (std::size_t i = 0; i < run.model.layer_widths.size(); ++i)
    widths << (i ? "," : "") << run.model.layer_widths[i];
  cfg.set("model.widths", widths.str());
  cfg.set("model.activation",
          run.model.activation == Activation::Relu ? "relu" : "tanh");
  set_u("model.encoder_cut", run.model.encoder_cut);

  auto set_phase = [&](const std::string& prefix, const PhaseConfig& p) {
    set_u(prefix + ".epochs", p.epochs);
    set_u(prefix + ".batch_size", p.batch_size);
    cfg.set(prefix + ".lr_schedule", format_lr_schedule(p.lr_schedule));
    cfg.set(prefix + ".loss", p.loss);
    cfg.set(prefix + ".variant", p.variant);
    set_d(prefix + ".lambda", p.lambda);
    set_d(prefix + ".sigma", p.sigma);
    cfg.set(prefix + ".train_scope", p.train_scope);
  };
  set_phase("phase1", run.phase1);
  set_phase("phase2", run.phase2);

  set_u("diag.every", run.diag_every);
  set_u("diag.bins", static_cast<std::uint64_t>(run.diag_bins));
  set_u("diag.dims", run.diag_dims);
  return cfg;
}

}  // namespace pidssl
