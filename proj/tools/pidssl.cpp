#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "pidssl/checkpoint.hpp"
#include "pidssl/config.hpp"
#include "pidssl/errors.hpp"
#include "pidssl/eval.hpp"
#include "pidssl/pid.hpp"
#include "pidssl/protocol.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

pidssl::Config load_config_with_overrides(const std::string& path,
                                          const std::vector<std::string>& overrides) {
  pidssl::Config cfg = pidssl::Config::from_file(path);
  for (const std::string& kv : overrides) cfg.apply_override(kv);
  return cfg;
}

void write_echo(const std::string& dir, const std::string& name,
                const std::string& text) {
  fs::create_directories(dir);
  std::ofstream out(dir + "/" + name, std::ios::trunc);
  if (!out) throw pidssl::ConfigError("cannot write " + dir + "/" + name);
  out << text;
}

int cmd_pretrain(const std::string& config_path,
                 const std::vector<std::string>& overrides) {
  pidssl::Config cfg = load_config_with_overrides(config_path, overrides);
  pidssl::TrainRun run = pidssl::train_run_from_config(cfg);
  pidssl::RunArtifacts art = pidssl::run_protocol(run);
  std::cout << "run directory: " << art.out_dir << "\n"
            << "phase1 checkpoint: " << art.phase1_checkpoint
            << (art.phase1_reused ? " (reused)" : "") << "\n"
            << "phase2 checkpoint: " << art.phase2_checkpoint
            << (art.phase2_reused ? " (reused)" : "") << "\n"
            << "manifest: " << art.manifest_path << "\n";
  return kExitOk;
}

int cmd_pid(const std::string& table_path) {
  std::ifstream in(table_path);
  if (!in) throw pidssl::ConfigError("cannot open table: " + table_path);
  pidssl::JointDistribution joint = pidssl::JointDistribution::from_table_text(in);
  pidssl::PidDecomposition d = pidssl::decompose(joint);
  std::cout << std::fixed << std::setprecision(6);
  std::cout << "redundancy " << d.redundancy << "\n"
            << "unique_s1  " << d.unique_s1 << "\n"
            << "unique_s2  " << d.unique_s2 << "\n"
            << "synergy    " << d.synergy << "\n"
            << "joint_mi   " << d.joint_mi << "\n";
  return kExitOk;
}

const std::vector<std::string> kProbeKeys = {
    "seed", "train_fraction", "probe.epochs", "probe.batch_size", "probe.lr",
    "dataset.kind", "dataset.path", "dataset.labels_path", "dataset.height",
    "dataset.width", "dataset.channels", "dataset.classes", "dataset.per_class",
    "dataset.snr", "dataset.seed"};

int cmd_probe(const std::string& config_path, const std::string& ckpt_path,
              const std::string& policy_name,
              const std::vector<std::string>& overrides) {
  pidssl::Config cfg = load_config_with_overrides(config_path, overrides);
  cfg.require_known_keys(kProbeKeys);
  if (!fs::exists(ckpt_path))
    throw pidssl::ConfigError("checkpoint not found: " + ckpt_path);

  pidssl::Checkpoint ckpt = pidssl::load_checkpoint(ckpt_path);
  pidssl::DatasetSource src = pidssl::dataset_source_from_config(cfg);
  std::vector<pidssl::ImageSample> all = pidssl::load_dataset(src);
  pidssl::DatasetSplit split =
      pidssl::split_dataset(all, cfg.get_double("train_fraction", 0.8));

  pidssl::ProbeConfig pcfg;
  pcfg.epochs = static_cast<std::size_t>(cfg.get_uint("probe.epochs", 40));
  pcfg.batch_size = static_cast<std::size_t>(cfg.get_uint("probe.batch_size", 128));
  pcfg.lr = cfg.get_double("probe.lr", 0.05);
  pcfg.seed = cfg.get_uint("seed", 7);

  std::string out_dir = fs::path(ckpt_path).parent_path().string();
  if (out_dir.empty()) out_dir = ".";
  write_echo(out_dir, "probe_config.resolved", cfg.render());

  const pidssl::AugmentPolicy* policy_ptr = nullptr;
  pidssl::AugmentPolicy policy;
  if (!policy_name.empty() && policy_name != "clean") {
    policy = pidssl::AugmentPolicy::by_name(policy_name);
    policy_ptr = &policy;
  }
  double top1 = pidssl::linear_probe(ckpt.spec, ckpt.params, split.train,
                                     split.test, pcfg, policy_ptr);

  json rec;
  rec["record"] = "probe";
  rec["checkpoint"] = fs::path(ckpt_path).filename().string();
  rec["phase"] = ckpt.phase;
  rec["policy"] = policy_ptr ? policy_name : "clean";
  rec["top1"] = top1;
  rec["epochs"] = pcfg.epochs;
  rec["seed"] = pcfg.seed;
  std::ofstream recs(out_dir + "/probe_records.jsonl", std::ios::app);
  recs << rec.dump() << "\n";

  std::cout << std::fixed << std::setprecision(4) << "top1 " << top1 << "\n";
  return kExitOk;
}

const std::vector<std::string> kDiagKeys = {
    "seed", "diag.bins", "diag.dims",
    "dataset.kind", "dataset.path", "dataset.labels_path", "dataset.height",
    "dataset.width", "dataset.channels", "dataset.classes", "dataset.per_class",
    "dataset.snr", "dataset.seed"};

int cmd_diagnose(const std::string& config_path, const std::string& ckpt_path,
                 const std::string& policy_name,
                 const std::vector<std::string>& overrides) {
  pidssl::Config cfg = load_config_with_overrides(config_path, overrides);
  cfg.require_known_keys(kDiagKeys);
  if (!fs::exists(ckpt_path))
    throw pidssl::ConfigError("checkpoint not found: " + ckpt_path);

  pidssl::Checkpoint ckpt = pidssl::load_checkpoint(ckpt_path);
  std::vector<pidssl::ImageSample> data =
      pidssl::load_dataset(pidssl::dataset_source_from_config(cfg));
  pidssl::AugmentPolicy policy = pidssl::AugmentPolicy::by_name(
      policy_name.empty() ? "standard" : policy_name);

  std::string out_dir = fs::path(ckpt_path).parent_path().string();
  if (out_dir.empty()) out_dir = ".";
  write_echo(out_dir, "diagnose_config.resolved", cfg.render());

  pidssl::PidDiagnosticReport rep = pidssl::pid_diagnostic(
      ckpt.spec, ckpt.params, data, policy,
      static_cast<int>(cfg.get_int("diag.bins", 4)),
      static_cast<std::size_t>(cfg.get_uint("diag.dims", 2)),
      cfg.get_uint("seed", 7));

  json rec;
  rec["record"] = "diagnostic";
  rec["checkpoint"] = fs::path(ckpt_path).filename().string();
  rec["policy"] = policy.name;
  rec["bins"] = rep.bins;
  rec["dims_used"] = rep.dims_used;
  rec["sample_count"] = rep.sample_count;
  rec["redundancy"] = rep.decomposition.redundancy;
  rec["unique_s1"] = rep.decomposition.unique_s1;
  rec["unique_s2"] = rep.decomposition.unique_s2;
  rec["synergy"] = rep.decomposition.synergy;
  rec["joint_mi"] = rep.decomposition.joint_mi;
  rec["ctl_redundancy"] = rep.control.redundancy;
  rec["ctl_unique_s1"] = rep.control.unique_s1;
  rec["ctl_unique_s2"] = rep.control.unique_s2;
  rec["ctl_synergy"] = rep.control.synergy;
  rec["ctl_joint_mi"] = rep.control.joint_mi;
  std::ofstream recs(out_dir + "/diagnostic_records.jsonl", std::ios::app);
  recs << rec.dump() << "\n";

  std::cout << std::fixed << std::setprecision(6);
  std::cout << "redundancy " << rep.decomposition.redundancy << " (control "
            << rep.control.redundancy << ")\n"
            << "unique_s1  " << rep.decomposition.unique_s1 << " (control "
            << rep.control.unique_s1 << ")\n"
            << "unique_s2  " << rep.decomposition.unique_s2 << " (control "
            << rep.control.unique_s2 << ")\n"
            << "synergy    " << rep.decomposition.synergy << " (control "
            << rep.control.synergy << ")\n"
            << "joint_mi   " << rep.decomposition.joint_mi << " (control "
            << rep.control.joint_mi << ")\n";
  return kExitOk;
}

std::vector<json> read_jsonl(const std::string& path) {
  std::vector<json> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(json::parse(line, nullptr, false));
  }
  return out;
}

int cmd_report(const std::string& run_dir, bool machine) {
  std::string manifest_path = run_dir + "/manifest.json";
  if (!fs::exists(manifest_path))
    throw pidssl::ConfigError("no manifest in run directory: " + run_dir);
  std::ifstream min(manifest_path);
  json manifest = json::parse(min, nullptr, false);
  if (manifest.is_discarded())
    throw pidssl::ConfigError("unreadable manifest: " + manifest_path);

  std::vector<std::string> warnings;
  json out;
  out["record"] = "report";
  out["run"] = run_dir;
  if (manifest.contains("seed")) out["seed"] = manifest["seed"];
  if (manifest.contains("variant")) out["variant"] = manifest["variant"];
  if (manifest.contains("aborted_phase"))
    warnings.push_back("run aborted in phase " +
                       std::to_string(int(manifest["aborted_phase"])));

  json phases = json::array();
  for (int phase = 1; phase <= 2; ++phase) {
    std::string mp = run_dir + "/metrics_phase" + std::to_string(phase) + ".jsonl";
    std::vector<json> recs = read_jsonl(mp);
    if (recs.empty()) {
      warnings.push_back("phase " + std::to_string(phase) + " metrics missing");
      continue;
    }
    json last = recs.back();
    json p;
    p["phase"] = phase;
    p["epochs"] = recs.size();
    for (const char* k : {"loss_mean", "term_diag", "term_offdiag", "c_minus_i_fro"})
      if (last.contains(k)) p[k] = last[k];
    phases.push_back(p);
  }
  out["phases"] = phases;
  if (!fs::exists(run_dir + "/ckpt_phase2.bin"))
    warnings.push_back("phase 2 checkpoint missing");

  json probes = json::array();
  for (const json& r : read_jsonl(run_dir + "/probe_records.jsonl"))
    if (!r.is_discarded()) probes.push_back(r);
  out["probes"] = probes;

  std::vector<json> diags = read_jsonl(run_dir + "/diagnostic_records.jsonl");
  if (!diags.empty() && !diags.back().is_discarded()) out["diagnostic"] = diags.back();
  out["warnings"] = warnings;

  if (machine) {
    json header;
    header["record"] = "report";
    header["run"] = run_dir;
    if (out.contains("seed")) header["seed"] = out["seed"];
    if (out.contains("variant")) header["variant"] = out["variant"];
    header["warnings"] = warnings;
    std::cout << header.dump() << "\n";
    for (json p : phases) {
      p["record"] = "phase_summary";
      std::cout << p.dump() << "\n";
    }
    for (const json& r : probes) std::cout << r.dump() << "\n";
    if (out.contains("diagnostic")) std::cout << out["diagnostic"].dump() << "\n";
    return kExitOk;
  }

  std::cout << "run: " << run_dir << "\n";
  if (out.contains("seed")) std::cout << "seed " << out["seed"] << "  ";
  if (out.contains("variant"))
    std::cout << "variant " << out["variant"].get<std::string>();
  std::cout << "\n\n";

  std::cout << "phase  epochs  loss_mean   term_diag   term_offdiag  |C-I|_F\n";
  for (const json& p : phases) {
    std::ostringstream row;
    row << std::left << std::setw(7) << p["phase"].get<int>() << std::setw(8)
        << p["epochs"].get<std::size_t>();
    row << std::fixed << std::setprecision(6);
    for (const char* k : {"loss_mean", "term_diag", "term_offdiag", "c_minus_i_fro"})
      row << std::setw(12) << (p.contains(k) ? p[k].get<double>() : 0.0);
    std::cout << row.str() << "\n";
  }

  if (!probes.empty()) {
    std::cout << "\nprobes:\n  checkpoint         policy     top1\n";
    for (const json& r : probes) {
      std::cout << "  " << std::left << std::setw(19)
                << r.value("checkpoint", std::string("?")) << std::setw(11)
                << r.value("policy", std::string("?")) << std::fixed
                << std::setprecision(4) << r.value("top1", 0.0) << "\n";
    }
  }

  if (out.contains("diagnostic")) {
    const json& d = out["diagnostic"];
    std::cout << "\npid diagnostic (" << d.value("checkpoint", std::string("?"))
              << ", " << d.value("policy", std::string("?")) << "):\n"
              << std::fixed << std::setprecision(4) << "  redundancy "
              << d.value("redundancy", 0.0) << " (control "
              << d.value("ctl_redundancy", 0.0) << ")\n"
              << "  synergy    " << d.value("synergy", 0.0) << " (control "
              << d.value("ctl_synergy", 0.0) << ")\n"
              << "  joint_mi   " << d.value("joint_mi", 0.0) << " (control "
              << d.value("ctl_joint_mi", 0.0) << ")\n";
  }

  if (!warnings.empty()) {
    std::cout << "\nwarnings:\n";
    for (const std::string& w : warnings) std::cout << "  " << w << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pidssl: synergy-preserving redundancy-reduction SSL toolkit"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, table_path, run_dir, policy;
  std::vector<std::string> overrides;
  bool machine = false;

  CLI::App* pretrain = app.add_subcommand("pretrain", "run the two-phase protocol");
  pretrain->add_option("--config", config_path, "run config file")->required();
  pretrain->add_option("--override", overrides, "dotted key=value override");

  CLI::App* pid = app.add_subcommand("pid", "decompose a trivariate table");
  pid->add_option("--table", table_path, "distribution table file")->required();

  CLI::App* probe = app.add_subcommand("probe", "linear-probe a checkpoint");
  probe->add_option("--config", config_path, "probe config file")->required();
  probe->add_option("--checkpoint", checkpoint_path, "checkpoint path")->required();
  probe->add_option("--policy", policy, "augment views: standard|heavy|identity");
  probe->add_option("--override", overrides, "dotted key=value override");

  CLI::App* diagnose = app.add_subcommand("diagnose", "PID diagnostic on a checkpoint");
  diagnose->add_option("--config", config_path, "diagnostic config file")->required();
  diagnose->add_option("--checkpoint", checkpoint_path, "checkpoint path")->required();
  diagnose->add_option("--policy", policy, "view policy (default standard)");
  diagnose->add_option("--override", overrides, "dotted key=value override");

  CLI::App* report = app.add_subcommand("report", "summarize a run directory");
  report->add_option("--run", run_dir, "run directory")->required();
  report->add_flag("--machine", machine, "emit line-delimited records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (pretrain->parsed()) return cmd_pretrain(config_path, overrides);
    if (pid->parsed()) return cmd_pid(table_path);
    if (probe->parsed()) return cmd_probe(config_path, checkpoint_path, policy, overrides);
    if (diagnose->parsed())
      return cmd_diagnose(config_path, checkpoint_path, policy, overrides);
    if (report->parsed()) return cmd_report(run_dir, machine);
  } catch (const pidssl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const pidssl::DivergenceError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
