#include "saferl/envs/quadrotor.hpp"

#include <cmath>

#include "saferl/errors.hpp"

namespace saferl {

QuadrotorConfig::QuadrotorConfig() {
  const double hover = g / (2.0 * k_thrust);
  u_lo = Eigen::Vector2d(hover - 1.5, hover - 1.5);
  u_hi = Eigen::Vector2d(hover + 1.5, hover + 1.5);
  w_max = Eigen::Vector2d(0.1, 0.1);
  reset_half = Eigen::VectorXd::Zero(6);
  reset_half << 0.1, 0.1, 0.1, 0.1, 0.05, 0.05;
}

namespace {

AffineDynamics quadrotor_linearization(const QuadrotorConfig& c) {
  Eigen::MatrixXd ac = Eigen::MatrixXd::Zero(6, 6);
  ac(0, 2) = 1.0;
  ac(1, 3) = 1.0;
  ac(2, 4) = c.g;            // x_ddot = K(u1+u2) sin(theta) -> g * theta
  ac(4, 5) = 1.0;
  ac(5, 4) = -c.d0;
  ac(5, 5) = -c.d1;

  Eigen::MatrixXd bc = Eigen::MatrixXd::Zero(6, 2);
  bc(3, 0) = c.k_thrust;     // z_ddot = -g + K(u1+u2) cos(theta)
  bc(3, 1) = c.k_thrust;
  bc(5, 0) = -c.n0;
  bc(5, 1) = c.n0;

  Eigen::VectorXd x_star = Eigen::VectorXd::Zero(6);
  x_star(1) = 1.0;
  const double hover = c.g / (2.0 * c.k_thrust);
  const Eigen::Vector2d u_star(hover, hover);

  AffineDynamics d;
  d.a = Eigen::MatrixXd::Identity(6, 6) + c.dt * ac;
  d.b = c.dt * bc;
  d.c = -c.dt * (ac * x_star + bc * u_star);
  return d;
}

Zonotope disturbance_zonotope(const QuadrotorConfig& c) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(6, 2);
  g(2, 0) = c.dt * c.w_max(0);
  g(3, 1) = c.dt * c.w_max(1);
  return {Eigen::VectorXd::Zero(6), g};
}

}  // namespace

QuadrotorEnv::QuadrotorEnv(QuadrotorConfig cfg) : cfg_(std::move(cfg)) {
  lin_ = quadrotor_linearization(cfg_);
  safe_ = SafeActionSet::reach_contain(lin_, disturbance_zonotope(cfg_), cfg_.x_phi,
                                       action_lo(), action_hi());
  validate_control_invariance(safe_);
}

Eigen::VectorXd QuadrotorEnv::equilibrium() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  x(1) = 1.0;
  return x;
}

Eigen::Vector2d QuadrotorEnv::hover_thrust() const {
  const double hover = cfg_.g / (2.0 * cfg_.k_thrust);
  return {hover, hover};
}

EnvState QuadrotorEnv::reset(std::uint64_t seed) const {
  EnvState s;
  s.rng = Rng(seed);
  s.x = equilibrium();
  for (Eigen::Index i = 0; i < 6; ++i)
    s.x(i) += s.rng.uniform(-cfg_.reset_half(i), cfg_.reset_half(i));
  s.t = 0;
  return s;
}

StepResult QuadrotorEnv::step(EnvState s, const Eigen::VectorXd& u) const {
  if (u.size() != 2) throw DimensionError("quadrotor step: action dim != 2");
  for (int i = 0; i < 2; ++i)
    if (u(i) < cfg_.u_lo(i) - 1e-6 || u(i) > cfg_.u_hi(i) + 1e-6)
      throw NumericalError("quadrotor step: thrust bound violated");

  // Reward on the current state; normalized thrust cost per the formula.
  const double dist = std::hypot(s.x(0) - 0.0, s.x(1) - 1.0);
  double thrust_l1 = 0.0;
  for (int i = 0; i < 2; ++i)
    thrust_l1 += std::abs((u(i) - cfg_.u_lo(i)) / (cfg_.u_hi(i) - cfg_.u_lo(i)));
  const double reward = -1.0 + std::exp(-dist - 0.005 * thrust_l1);

  const double w1 = s.rng.uniform(-cfg_.w_max(0), cfg_.w_max(0));
  const double w2 = s.rng.uniform(-cfg_.w_max(1), cfg_.w_max(1));

  StepResult r;
  r.next.x = lin_.a * s.x + lin_.b * u + lin_.c;
  r.next.x(2) += cfg_.dt * w1;
  r.next.x(3) += cfg_.dt * w2;
  r.next.t = s.t + 1;
  r.next.rng = s.rng;
  r.reward = reward;
  r.done = r.next.t >= cfg_.horizon;
  r.applied = u;
  return r;
}

std::optional<SafeActionSet> QuadrotorEnv::safe_action_set(const EnvState&) const {
  return safe_;
}

}  // namespace saferl
