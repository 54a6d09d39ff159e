#pragma once

#include "saferl/env.hpp"

namespace saferl {

// Planar quadrotor stabilization about hover at (0, 1). State
// x = (e_x, e_z, e_x_dot, e_z_dot, theta, theta_dot), two thrust inputs in
// [u_lo, u_hi]. The environment itself integrates the linearization about
// the equilibrium with explicit Euler plus a uniform acceleration
// disturbance on (e_x_dot, e_z_dot). Model constants follow the planar
// benchmark lineage; they are configuration values, not reported ones.
struct QuadrotorConfig {
  double k_thrust = 0.89 / 1.4;
  double d0 = 70.0;
  double d1 = 17.0;
  double n0 = 55.0;
  double g = 9.81;
  double dt = 0.02;
  int horizon = 200;
  Eigen::Vector2d u_lo;
  Eigen::Vector2d u_hi;
  Eigen::Vector2d w_max;            // disturbance box half-widths
  Eigen::VectorXd reset_half;       // uniform reset half-range about the equilibrium
  Zonotope x_phi;

  QuadrotorConfig();
};

class QuadrotorEnv final : public Env {
 public:
  explicit QuadrotorEnv(QuadrotorConfig cfg);

  std::string name() const override { return "quadrotor"; }
  Eigen::Index state_dim() const override { return 6; }
  Eigen::Index action_dim() const override { return 2; }
  Eigen::Index obs_dim() const override { return 6; }
  int horizon() const override { return cfg_.horizon; }
  Eigen::VectorXd action_lo() const override { return cfg_.u_lo; }
  Eigen::VectorXd action_hi() const override { return cfg_.u_hi; }
  Eigen::VectorXd obs(const EnvState& s) const override { return s.x; }
  EnvState reset(std::uint64_t seed) const override;
  StepResult step(EnvState s, const Eigen::VectorXd& u) const override;
  std::optional<SafeActionSet> safe_action_set(const EnvState& s) const override;

  const QuadrotorConfig& config() const { return cfg_; }
  const AffineDynamics& dynamics() const { return lin_; }
  Eigen::VectorXd equilibrium() const;
  Eigen::Vector2d hover_thrust() const;

 private:
  QuadrotorConfig cfg_;
  AffineDynamics lin_;
  SafeActionSet safe_;
};

}  // namespace saferl
