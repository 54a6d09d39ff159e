#include "saferl/envs/pendulum.hpp"

#include <cmath>

#include "saferl/errors.hpp"

namespace saferl {

namespace {

AffineDynamics pendulum_linearization(const PendulumConfig& c) {
  // Continuous: d(theta)/dt = theta_dot, d(theta_dot)/dt = (g/l) theta + u/(m l^2)
  // about the origin, discretized with the same explicit Euler step the
  // environment uses.
  AffineDynamics d;
  d.a.setZero(2, 2);
  d.a << 1.0, c.dt, c.dt * c.g / c.l, 1.0;
  d.b.setZero(2, 1);
  d.b(1, 0) = c.dt / (c.m * c.l * c.l);
  d.c = Eigen::VectorXd::Zero(2);
  return d;
}

}  // namespace

PendulumEnv::PendulumEnv(PendulumConfig cfg) : cfg_(std::move(cfg)) {
  lin_ = pendulum_linearization(cfg_);
  safe_ = SafeActionSet::reach_contain(lin_, Zonotope::point(Eigen::VectorXd::Zero(2)),
                                       cfg_.x_phi, action_lo(), action_hi());
  validate_control_invariance(safe_);
}

Eigen::VectorXd PendulumEnv::action_lo() const {
  return Eigen::VectorXd::Constant(1, -cfg_.max_torque);
}
Eigen::VectorXd PendulumEnv::action_hi() const {
  return Eigen::VectorXd::Constant(1, cfg_.max_torque);
}

EnvState PendulumEnv::reset(std::uint64_t seed) const {
  EnvState s;
  s.rng = Rng(seed);
  s.x.resize(2);
  s.x(0) = s.rng.uniform(-cfg_.reset_theta, cfg_.reset_theta);
  s.x(1) = s.rng.uniform(-cfg_.reset_theta_dot, cfg_.reset_theta_dot);
  s.t = 0;
  return s;
}

StepResult PendulumEnv::step(EnvState s, const Eigen::VectorXd& u) const {
  if (u.size() != 1) throw DimensionError("pendulum step: action dim != 1");
  if (std::abs(u(0)) > cfg_.max_torque + 1e-6)
    throw NumericalError("pendulum step: action bound violated");

  const double theta = s.x(0), theta_dot = s.x(1);
  const double reward =
      -(theta * theta + 0.1 * theta_dot * theta_dot + 0.001 * u(0) * u(0));
  const double theta_ddot =
      (cfg_.g / cfg_.l) * std::sin(theta) + u(0) / (cfg_.m * cfg_.l * cfg_.l);

  StepResult r;
  r.next.x.resize(2);
  r.next.x(0) = theta + cfg_.dt * theta_dot;
  r.next.x(1) = theta_dot + cfg_.dt * theta_ddot;
  r.next.t = s.t + 1;
  r.next.rng = s.rng;
  r.reward = reward;
  r.done = r.next.t >= cfg_.horizon;
  r.applied = u;
  return r;
}

std::optional<SafeActionSet> PendulumEnv::safe_action_set(const EnvState&) const {
  return safe_;
}

}  // namespace saferl
