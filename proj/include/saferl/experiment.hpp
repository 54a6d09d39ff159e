#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saferl/a2c.hpp"
#include "saferl/td3.hpp"

namespace saferl {

inline constexpr const char* kCodeVersion = "saferl-0.1.0";

struct ExperimentConfig {
  std::string env_id = "pendulum";
  std::string algorithm = "td3";  // "td3" or "a2c"
  WiringMode wiring = WiringMode::Unsafe;
  Mitigation mitigation = Mitigation::None;
  double w = 0.1;
  long train_steps = 50000;
  long eval_interval = 2500;
  std::vector<std::uint64_t> train_seeds = {1, 2, 3};
  std::vector<std::uint64_t> eval_seeds = {101, 102, 103, 104, 105};
  std::string out_dir = "runs/exp";
  std::string data_dir = "data";
  Td3Config td3;
  A2cConfig a2c;

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

// FNV-1a hash of the canonical config JSON; seeds the bootstrap RNG and
// identifies runs for deduplication.
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct RunSummary {
  Eigen::VectorXd final_returns;  // one per (train seed, eval seed) pair
  Eigen::VectorXd interventions;
  double iqm = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  long violations = 0;
  long empty_safe_sets = 0;
  std::string manifest_hash;
};

// Trains one run per train seed (seeds run as independent parallel
// workers), writing per-seed metrics.csv and final checkpoints plus a
// summary.json under cfg.out_dir. Rerunning the same config yields
// byte-identical metrics files.
RunSummary run_experiment(const ExperimentConfig& cfg);

// Deterministic evaluation of a finished run directory (reads the config
// copy and final checkpoints). Returns the per-episode returns; optionally
// writes an episode trace CSV (t, x, u, u_phi, r, intervention).
Eigen::VectorXd eval_run(const std::string& run_dir, int episodes,
                         const std::string& trace_csv = "");

// Output root for relative run directories; overridden by $SAFERL_OUT.
std::string output_root();

}  // namespace saferl
