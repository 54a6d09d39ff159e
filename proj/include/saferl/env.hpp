#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>

#include "saferl/rng.hpp"
#include "saferl/safe_set.hpp"

namespace saferl {

// Environment state: full state vector (which may carry episode context such
// as obstacle layouts beyond what the policy observes), step index, and the
// episode noise stream.
struct EnvState {
  Eigen::VectorXd x;
  int t = 0;
  Rng rng;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool done = false;
  // info block; the wiring layer fills intervention/penalty.
  Eigen::VectorXd applied;
  bool intervention = false;
  double penalty = 0.0;
};

class Env {
 public:
  virtual ~Env() = default;

  virtual std::string name() const = 0;
  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index action_dim() const = 0;
  virtual Eigen::Index obs_dim() const = 0;
  virtual int horizon() const = 0;

  virtual Eigen::VectorXd action_lo() const = 0;
  virtual Eigen::VectorXd action_hi() const = 0;

  // Policy view of the state.
  virtual Eigen::VectorXd obs(const EnvState& s) const = 0;

  // Deterministic state from seed; also seeds the episode noise stream.
  virtual EnvState reset(std::uint64_t seed) const = 0;

  // Steps with the given (already safeguarded or clipped) action. Consumes
  // the state's noise stream; the advanced stream is carried in next.
  virtual StepResult step(EnvState s, const Eigen::VectorXd& u) const = 0;

  // State-dependent safe action set; nullopt means no safe action exists
  // (the episode must terminate with a distinguished outcome).
  virtual std::optional<SafeActionSet> safe_action_set(const EnvState& s) const = 0;
};

struct EnvOptions {
  std::string data_dir = "data";
};

// Factory for the three benchmarks: "pendulum", "quadrotor", "seeker".
// Loads constants and zonotope data from <data_dir>/<id>.json and validates
// shipped safe-state sets at load time.
std::unique_ptr<Env> make_env(const std::string& id, const EnvOptions& opts = {});

// Load-time check that the shipped safe-state zonotope is one-step control
// invariant under the shipped dynamics: every sampled state of X_phi must
// admit a non-empty safe action set. Throws ConfigError on failure.
void validate_control_invariance(const SafeActionSet& set, int max_samples = 256);

}  // namespace saferl
