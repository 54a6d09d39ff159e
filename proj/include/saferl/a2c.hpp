#pragma once

#include <cstdint>
#include <vector>

#include "saferl/eval.hpp"
#include "saferl/gae.hpp"
#include "saferl/policy.hpp"
#include "saferl/wiring.hpp"

namespace saferl {

struct A2cConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  int n_steps = 16;
  double actor_lr = 7e-4;
  double value_lr = 7e-4;
  double value_coef = 0.5;
  // Entropy bonus is fixed at zero so the SE/SP equality for stochastic
  // policies holds exactly.
  double init_log_std = -0.6931471805599453;  // log(0.5)
  std::vector<Eigen::Index> hidden = {64, 64};
  WiringMode wiring = WiringMode::Unsafe;
  Mitigation mitigation = Mitigation::None;
  double w = 0.1;
};

// Advantage actor-critic with GAE and a diagonal Gaussian policy. The
// log-probability in the policy gradient always scores the pre-projection
// action, in both safeguarded wirings; the state-value critic never sees
// actions, which is what makes the SE and SP parameter sequences coincide.
// The penalty-critic mitigation for stochastic policies collapses to the
// SE reward penalty (the distinction vanishes for state-value critics), so
// PenC here is that penalty path under the SafePolicy wiring.
class A2cTrainer {
 public:
  A2cTrainer(const Env& env, A2cConfig cfg, std::uint64_t seed);

  struct UpdateStats {
    double reward_sum = 0.0;
    long steps = 0;
    long interventions = 0;
    double penalty_sum = 0.0;
    long violations = 0;
    long episode_ends = 0;
    long empty_safe_sets = 0;
    double actor_loss = 0.0;
    double value_loss = 0.0;
  };

  // Collects n_steps transitions and performs one gradient update.
  UpdateStats update();

  long env_steps() const { return env_steps_; }
  const GaussianPolicy& policy() const { return policy_; }
  const MlpParams& value() const { return value_; }

  // Flat views of all learned parameters (policy mean, log-std, value),
  // used by the equality tests.
  Eigen::VectorXd policy_flat() const;
  Eigen::VectorXd value_flat() const { return value_.flat(); }

 private:
  void collect(UpdateStats& stats, std::vector<Transition>& rollout);

  const Env& env_;
  A2cConfig cfg_;
  RunStreams streams_;
  Eigen::VectorXd lo_, hi_;

  GaussianPolicy policy_;
  MlpParams value_;
  AdamState opt_mean_, opt_log_std_, opt_value_;

  EnvState cur_;
  long env_steps_ = 0;
};

}  // namespace saferl
