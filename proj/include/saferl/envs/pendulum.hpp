#pragma once

#include "saferl/env.hpp"

namespace saferl {

// Pendulum stabilization about the upright equilibrium. State x = (theta,
// theta_dot), torque-like input |u| <= max_torque, explicit Euler dynamics
//   theta_ddot = (g/l) sin(theta) + u / (m l^2),
// reward -(theta^2 + 0.1 theta_dot^2 + 0.001 u^2). The safeguard uses the
// linearization about the origin in reach-contain mode with the shipped
// safe-state zonotope and a zero disturbance set.
struct PendulumConfig {
  double g = 10.0;
  double m = 1.0;
  double l = 1.0;
  double dt = 0.05;
  double max_torque = 8.0;
  int horizon = 200;
  double reset_theta = 0.5;      // uniform reset range, must sit inside X_phi
  double reset_theta_dot = 0.5;
  Zonotope x_phi;
};

class PendulumEnv final : public Env {
 public:
  explicit PendulumEnv(PendulumConfig cfg);

  std::string name() const override { return "pendulum"; }
  Eigen::Index state_dim() const override { return 2; }
  Eigen::Index action_dim() const override { return 1; }
  Eigen::Index obs_dim() const override { return 2; }
  int horizon() const override { return cfg_.horizon; }
  Eigen::VectorXd action_lo() const override;
  Eigen::VectorXd action_hi() const override;
  Eigen::VectorXd obs(const EnvState& s) const override { return s.x; }
  EnvState reset(std::uint64_t seed) const override;
  StepResult step(EnvState s, const Eigen::VectorXd& u) const override;
  std::optional<SafeActionSet> safe_action_set(const EnvState& s) const override;

  const PendulumConfig& config() const { return cfg_; }
  const AffineDynamics& linearized() const { return lin_; }

 private:
  PendulumConfig cfg_;
  AffineDynamics lin_;
  SafeActionSet safe_;
};

}  // namespace saferl
