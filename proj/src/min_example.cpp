#include "saferl/min_example.hpp"

#include <cmath>
#include <fstream>

#include "saferl/envs/quadrotor.hpp"
#include "saferl/envs/seeker.hpp"
#include "saferl/errors.hpp"
#include "saferl/mlp.hpp"

namespace saferl {

namespace {

constexpr double kProxyGamma = 0.9;
constexpr int kProxyHorizon = 25;

double quadrotor_reward(const QuadrotorEnv& env, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u) {
  const auto& c = env.config();
  double thrust = 0.0;
  for (int i = 0; i < 2; ++i)
    thrust += std::abs((u(i) - c.u_lo(i)) / (c.u_hi(i) - c.u_lo(i)));
  return -1.0 + std::exp(-std::hypot(x(0), x(1) - 1.0) - 0.005 * thrust);
}

// Discounted return of (u, equilibrium continuation) on the deterministic
// part of the dynamics.
double quadrotor_proxy(const QuadrotorEnv& env, const Eigen::VectorXd& x0,
                       const Eigen::VectorXd& u0) {
  const AffineDynamics& dyn = env.dynamics();
  const Eigen::Vector2d hover = env.hover_thrust();
  Eigen::VectorXd x = x0;
  Eigen::VectorXd u = u0;
  double ret = 0.0, disc = 1.0;
  for (int k = 0; k < kProxyHorizon; ++k) {
    ret += disc * quadrotor_reward(env, x, u);
    disc *= kProxyGamma;
    x = dyn.a * x + dyn.b * u + dyn.c;
    u = hover;
  }
  return ret;
}

double seeker_proxy(const SeekerEnv& env, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& u0) {
  const double dt = env.config().dt;
  const double amax = env.config().a_max;
  Eigen::Vector2d e = x0.head(2), v = x0.segment(2, 2);
  const Eigen::Vector2d goal = x0.segment(4, 2);
  Eigen::Vector2d u = u0;
  double ret = 0.0, disc = 1.0;
  for (int k = 0; k < kProxyHorizon; ++k) {
    ret += disc * (-1.0 + std::exp(-(e - goal).norm()));
    disc *= kProxyGamma;
    e += dt * v;
    v += dt * u;
    for (int i = 0; i < 2; ++i) {
      const double brake = -std::copysign(std::min(amax, std::abs(v(i)) / dt), v(i));
      u(i) = v(i) == 0.0 ? 0.0 : brake;
    }
  }
  return ret;
}

struct Critic {
  MlpParams net;
  Eigen::VectorXd in_center, in_half;

  Eigen::VectorXd norm(const Eigen::VectorXd& u) const {
    return ((u - in_center).array() / in_half.array()).matrix();
  }
  double value(const Eigen::VectorXd& u) const { return mlp_forward(net, norm(u))(0); }
  Eigen::VectorXd grad(const Eigen::VectorXd& u) const {
    const Eigen::VectorXd g =
        mlp_backward(net, norm(u), Eigen::VectorXd::Ones(1)).second;
    return (g.array() / in_half.array()).matrix();
  }
};

Critic fit_critic(const Eigen::MatrixXd& actions, const Eigen::VectorXd& targets,
                  const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int epochs,
                  double lr, Rng& rng) {
  Critic c;
  c.in_center = 0.5 * (lo + hi);
  c.in_half = 0.5 * (hi - lo);
  MlpArch arch{actions.rows(), {64, 64}, 1};
  c.net = MlpParams::random_init(arch, rng);

  Eigen::MatrixXd x = actions;
  for (Eigen::Index k = 0; k < x.cols(); ++k) x.col(k) = c.norm(actions.col(k));
  AdamState opt(c.net.flat().size());
  const double inv_n = 1.0 / double(x.cols());
  for (int e = 0; e < epochs; ++e) {
    MlpBatchCache cache;
    const Eigen::RowVectorXd pred = mlp_forward_batch(c.net, x, &cache);
    GradAccumulator grad(c.net.flat().size());
    mlp_backward_batch(c.net, cache, (2.0 * inv_n) * (pred - targets.transpose()), grad);
    adam_step(c.net, grad, opt, lr);
  }
  return c;
}

}  // namespace

MarginProbe probe_margin(const SafeActionSet& set, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double delta) {
  MarginProbe out;
  out.feasible = is_safe_action(set, x, u);
  bool all_inside = out.feasible;
  bool any_outside = false;
  const Eigen::Index na = u.size();
  for (int d = 0; d < 4 * na; ++d) {
    const double ang = 2.0 * M_PI * double(d) / double(4 * na);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(na);
    dir(0) = std::cos(ang);
    if (na > 1) dir(1) = std::sin(ang);
    const bool inside = is_safe_action(set, x, u + delta * dir);
    all_inside = all_inside && inside;
    any_outside = any_outside || !inside;
  }
  out.strictly_interior = out.feasible && all_inside;
  out.near_boundary = (out.feasible && any_outside) || (!out.feasible && [&] {
                        const ProjectionSolution sol = project(set, x, u);
                        return sol.status == QpStatus::Solved &&
                               (sol.u_phi - u).norm() <= delta;
                      }());
  return out;
}

MinExampleResult run_min_example(const MinExampleConfig& cfg) {
  const auto env = make_env(cfg.env_id, {cfg.data_dir});
  EnvState study;
  study.x = cfg.fixed_state;

  const auto* quad = dynamic_cast<const QuadrotorEnv*>(env.get());
  const auto* seeker = dynamic_cast<const SeekerEnv*>(env.get());
  if (!quad && !seeker)
    throw ConfigError("min-example supports the quadrotor and seeker environments");

  if (study.x.size() == 0) {
    if (quad) {
      study.x = quad->equilibrium();
      // Study state: displaced with velocity toward the safe-state boundary,
      // so the task-optimal first action is unsafe.
      study.x(0) += 0.12;
      study.x(2) += 0.35;
    } else {
      study.x.setZero(15);
      study.x.head(2) << -2.0, 0.0;   // start
      study.x.segment(2, 2) << 0.9, 0.0;  // heading at the obstacle
      study.x.segment(4, 2) << 2.5, 0.0;  // goal behind it
      study.x.segment(6, 3) << 0.0, 0.0, 1.0;
      study.x.segment(9, 3) << 3.5, 3.5, 0.6;
      study.x.segment(12, 3) << -3.5, -3.5, 0.6;
    }
  }

  const auto set_opt = env->safe_action_set(study);
  if (!set_opt) throw NumericalError("min-example: study state has an empty safe set");
  const SafeActionSet& set = *set_opt;
  const Eigen::VectorXd lo = env->action_lo(), hi = env->action_hi();
  const Eigen::Index na = env->action_dim();

  const auto proxy = [&](const Eigen::VectorXd& u) {
    return quad ? quadrotor_proxy(*quad, study.x, u) : seeker_proxy(*seeker, study.x, u);
  };

  // Behavior policy: uniform over the actuation box.
  Rng rng(cfg.seed);
  Eigen::MatrixXd actions(na, cfg.n_samples);
  for (int k = 0; k < cfg.n_samples; ++k)
    for (Eigen::Index i = 0; i < na; ++i) actions(i, k) = rng.uniform(lo(i), hi(i));

  Eigen::MatrixXd projected_samples(na, cfg.n_samples);
  Eigen::VectorXd xi(cfg.n_samples);
  for (int k = 0; k < cfg.n_samples; ++k) {
    const ProjectionSolution sol = project(set, study.x, actions.col(k));
    if (sol.status != QpStatus::Solved)
      throw NumericalError("min-example: projection failed while sampling");
    projected_samples.col(k) = sol.u_phi;
    xi(k) = (actions.col(k) - sol.u_phi).squaredNorm();
  }

  Eigen::VectorXd r_raw(cfg.n_samples), r_safe(cfg.n_samples);
  for (int k = 0; k < cfg.n_samples; ++k) {
    r_raw(k) = proxy(actions.col(k));
    r_safe(k) = proxy(projected_samples.col(k));
  }

  // Which critics this study needs.
  Critic q_main, q_pen;
  const bool sp = cfg.wiring == WiringMode::SafePolicy;
  {
    Eigen::VectorXd targets;
    Eigen::MatrixXd inputs = actions;
    switch (cfg.wiring) {
      case WiringMode::Unsafe:
        targets = r_raw;
        break;
      case WiringMode::SafeEnv:
        targets = cfg.mitigation == Mitigation::Penalty
                      ? (r_safe - cfg.w * xi).eval()
                      : r_safe;
        break;
      case WiringMode::SafePolicy:
        inputs = projected_samples;  // the SP critic only ever sees safe actions
        targets = r_safe;
        break;
    }
    q_main = fit_critic(inputs, targets, lo, hi, cfg.critic_epochs, cfg.critic_lr, rng);
    if (sp && cfg.mitigation == Mitigation::PenC) {
      const Eigen::VectorXd pen_targets = cfg.w * xi;
      q_pen = fit_critic(actions, pen_targets, lo, hi, cfg.critic_epochs, cfg.critic_lr, rng);
    }
  }

  // Gradient-ascent iterates of the free action tensor.
  Eigen::VectorXd u = cfg.u0;
  if (u.size() == 0) {
    if (quad)
      u = Eigen::Vector2d(hi(0), 0.75 * lo(1) + 0.25 * hi(1));
    else
      u = Eigen::Vector2d(hi(0), 0.2 * hi(1));
  }

  MinExampleResult res;
  res.iterates.resize(cfg.steps + 1, na);
  res.projected.resize(cfg.steps + 1, na);
  res.proj_dist.resize(cfg.steps + 1);
  res.feasible.resize(cfg.steps + 1);
  res.true_value.resize(cfg.steps + 1);

  const auto record = [&](int row, const Eigen::VectorXd& uk) {
    const ProjectionSolution sol = project(set, study.x, uk);
    if (sol.status != QpStatus::Solved)
      throw NumericalError("min-example: projection failed on an iterate");
    res.iterates.row(row) = uk.transpose();
    res.projected.row(row) = sol.u_phi.transpose();
    res.proj_dist(row) = (uk - sol.u_phi).norm();
    res.feasible(row) = sol.short_circuit ? 1.0 : 0.0;
    res.true_value(row) = proxy(sol.u_phi);
  };

  record(0, u);
  for (int k = 1; k <= cfg.steps; ++k) {
    Eigen::VectorXd ascent(na);
    if (!sp) {
      ascent = q_main.grad(u);
    } else {
      const ContainmentConstraints cons = set.constraints(study.x);
      const ProjectionSolution sol = project_onto(cons, u);
      if (sol.status != QpStatus::Solved)
        throw NumericalError("min-example: projection failed during ascent");
      const SafeguardJacobian jac = safeguard_jacobian(sol, cons);
      ascent = jac.j.transpose() * q_main.grad(sol.u_phi);
      if (cfg.mitigation == Mitigation::Psl) {
        const Eigen::VectorXd resid = u - sol.u_phi;
        ascent -= 2.0 * cfg.w * (resid - jac.j.transpose() * resid);
      }
      if (cfg.mitigation == Mitigation::PenC) ascent -= q_pen.grad(u);
    }
    u = (u + cfg.lr * ascent).cwiseMax(lo).cwiseMin(hi);
    record(k, u);
  }

  if (!cfg.out_csv.empty()) {
    std::ofstream f(cfg.out_csv);
    if (!f) throw ConfigError("cannot write min-example csv: " + cfg.out_csv);
    f << "step";
    for (Eigen::Index i = 0; i < na; ++i) f << ",u" << i;
    for (Eigen::Index i = 0; i < na; ++i) f << ",u_phi" << i;
    f << ",proj_dist,feasible,true_value\n";
    f.precision(17);
    for (int k = 0; k <= cfg.steps; ++k) {
      f << k;
      for (Eigen::Index i = 0; i < na; ++i) f << "," << res.iterates(k, i);
      for (Eigen::Index i = 0; i < na; ++i) f << "," << res.projected(k, i);
      f << "," << res.proj_dist(k) << "," << res.feasible(k) << "," << res.true_value(k)
        << "\n";
    }
  }
  return res;
}

}  // namespace saferl
