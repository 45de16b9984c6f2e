#ifndef PIDSSL_PROTOCOL_HPP
#define PIDSSL_PROTOCOL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pidssl/augment.hpp"
#include "pidssl/checkpoint.hpp"
#include "pidssl/config.hpp"
#include "pidssl/dataset.hpp"
#include "pidssl/losses.hpp"
#include "pidssl/network.hpp"

namespace pidssl {

struct LrPoint {
  std::size_t start_epoch;
  double lr;
};

// One pre-training phase. The redundancy phase runs with variant "none"
// (plain BT or plain W-MSE); the synergy phase pulls off-diagonals toward a
// Gaussian or running-average target.
struct PhaseConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  std::vector<LrPoint> lr_schedule;  // piecewise constant, starts at epoch 0
  std::string loss = "bt";           // bt | wmse
  std::string variant = "none";      // none | gaussian | average
  double lambda = 5e-3;
  double sigma = 1.0;                   // gaussian target std
  std::string train_scope = "full";     // full | projector_only

  double lr_at(std::size_t epoch) const;
  void validate(bool is_phase2) const;
};

struct TrainRun {
  PhaseConfig phase1;
  PhaseConfig phase2;
  std::uint64_t seed = 1;
  DatasetSource dataset;
  double train_fraction = 0.8;
  std::string augment_policy = "standard";
  MlpSpec model;
  std::string out_dir;
  std::size_t diag_every = 10;  // PID diagnostic cadence in epochs; 0 disables
  int diag_bins = 4;
  std::size_t diag_dims = 2;

  void validate() const;
};

// Per-epoch training record; one JSON line each in the metrics log.
struct MetricsRecord {
  int phase = 0;
  std::size_t epoch = 0;
  double lr = 0.0;
  double loss_mean = 0.0;
  double term_diag = 0.0;     // diagonal term (bt) or view MSE (wmse)
  double term_offdiag = 0.0;  // off-diagonal penalty
  double c_minus_i_fro = 0.0;
  bool has_pid = false;
  double pid_redundancy = 0.0, pid_synergy = 0.0, pid_joint_mi = 0.0;
  double ctl_redundancy = 0.0, ctl_synergy = 0.0, ctl_joint_mi = 0.0;

  std::string to_json_line() const;
};

struct PhaseOutcome {
  Checkpoint ckpt;
  std::vector<MetricsRecord> metrics;
};

// Redundancy-reduction phase from fresh parameters. metrics_path may be
// empty; when set the file is truncated and one JSON line written per epoch.
PhaseOutcome pretrain_phase1(const TrainRun& run,
                             const std::vector<ImageSample>& train_data,
                             const std::string& metrics_path = "");

// One full deterministic pass with frozen weights and a fixed augmentation
// seed; per-batch cross-correlations accumulated into their mean.
OffDiagonalTarget compute_average_c(const Checkpoint& ckpt,
                                    const std::vector<ImageSample>& data,
                                    std::size_t batch_size,
                                    const AugmentPolicy& policy,
                                    std::uint64_t aug_seed);

// Synergy phase resuming from the phase-1 checkpoint weights.
PhaseOutcome pretrain_phase2(const Checkpoint& phase1_ckpt, const TrainRun& run,
                             const OffDiagonalTarget& target,
                             const std::vector<ImageSample>& train_data,
                             const std::string& metrics_path = "");

struct RunArtifacts {
  std::string out_dir;
  std::string phase1_checkpoint;
  std::string phase2_checkpoint;
  std::string manifest_path;
  bool phase1_reused = false;
  bool phase2_reused = false;
};

// Full orchestration: config echo, dataset load/split, phase 1, statistics
// pass when the variant needs it, phase 2, manifest with content hashes.
// Existing valid checkpoints in out_dir are reused (idempotent resume).
RunArtifacts run_protocol(const TrainRun& run);

// Config binding (documented key set; unknown keys are errors).
TrainRun train_run_from_config(const Config& cfg);
Config render_train_run(const TrainRun& run);
DatasetSource dataset_source_from_config(const Config& cfg);

std::vector<LrPoint> parse_lr_schedule(const std::string& text);
std::string format_lr_schedule(const std::vector<LrPoint>& sched);

// Worker cap from PIDSSL_THREADS (>= 1); augmentation fan-out only.
std::size_t worker_count();

}  // namespace pidssl

#endif
