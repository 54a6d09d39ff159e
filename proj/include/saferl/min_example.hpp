#pragma once

#include <Eigen/Dense>
#include <string>

#include "saferl/env.hpp"
#include "saferl/wiring.hpp"

namespace saferl {

// Single-state policy-improvement study. A critic is fit by supervised
// regression on (action, return-proxy) pairs gathered with a uniform random
// behavior policy at one fixed state; a free action tensor then takes
// `steps` SGD ascent steps under the chosen wiring and mitigation. The
// return proxy rolls the deterministic dynamics for a short horizon with
// the equilibrium/braking continuation.
struct MinExampleConfig {
  std::string env_id = "quadrotor";
  Eigen::VectorXd fixed_state;  // empty -> the env's built-in study state
  WiringMode wiring = WiringMode::Unsafe;
  Mitigation mitigation = Mitigation::None;
  double w = 1.0;
  int steps = 50;
  double lr = 0.08;
  int n_samples = 2000;
  int critic_epochs = 1500;
  double critic_lr = 0.01;
  std::uint64_t seed = 7;
  Eigen::VectorXd u0;  // empty -> the env's built-in unsafe start
  std::string data_dir = "data";
  std::string out_csv;  // empty -> no file written
};

struct MinExampleResult {
  Eigen::MatrixXd iterates;    // (steps+1) x action_dim, row 0 = u0
  Eigen::MatrixXd projected;   // projection of each iterate
  Eigen::VectorXd proj_dist;   // ||u - Phi(u)|| per iterate
  Eigen::VectorXd feasible;    // 1.0 when the iterate is in the safe set
  Eigen::VectorXd true_value;  // return proxy of the projected iterate
};

MinExampleResult run_min_example(const MinExampleConfig& cfg);

// Geometry probe used by the assertions on min-example output: classifies
// an action against the safe set at the study state with margin delta.
struct MarginProbe {
  bool feasible = false;
  bool strictly_interior = false;  // feasible and all delta-ball probes feasible
  bool near_boundary = false;      // within delta of the boundary (either side)
};
MarginProbe probe_margin(const SafeActionSet& set, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double delta);

}  // namespace saferl
