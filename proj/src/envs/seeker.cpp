#include "saferl/envs/seeker.hpp"

#include <cmath>

#include "saferl/errors.hpp"

namespace saferl {

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Distance from point p to the axis-aligned rectangle [lo, hi].
double point_rect_dist(const Eigen::Vector2d& p, const Eigen::Vector2d& lo,
                       const Eigen::Vector2d& hi) {
  const double dx = std::max({lo(0) - p(0), p(0) - hi(0), 0.0});
  const double dy = std::max({lo(1) - p(1), p(1) - hi(1), 0.0});
  return std::hypot(dx, dy);
}

}  // namespace

SeekerEnv::SeekerEnv(SeekerConfig cfg) : cfg_(std::move(cfg)) {}

Eigen::VectorXd SeekerEnv::action_lo() const {
  return Eigen::VectorXd::Constant(2, -cfg_.a_max);
}
Eigen::VectorXd SeekerEnv::action_hi() const {
  return Eigen::VectorXd::Constant(2, cfg_.a_max);
}

Eigen::VectorXd SeekerEnv::obs(const EnvState& s) const {
  Eigen::VectorXd o(4);
  o.head(2) = s.x.head(2) - s.x.segment(4, 2);
  o.tail(2) = s.x.segment(2, 2);
  return o;
}

bool SeekerEnv::segment_intersects_disc(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                        const Eigen::Vector2d& center, double radius) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (center - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - center).norm() <= radius;
}

EnvState SeekerEnv::reset(std::uint64_t seed) const {
  EnvState s;
  s.rng = Rng(seed);
  s.t = 0;
  s.x.setZero(15);

  for (int attempt = 0; attempt < cfg_.reset_attempts; ++attempt) {
    const Eigen::Vector2d start(s.rng.uniform(-cfg_.spawn_half, cfg_.spawn_half),
                                s.rng.uniform(-cfg_.spawn_half, cfg_.spawn_half));
    const Eigen::Vector2d goal(s.rng.uniform(-cfg_.spawn_half, cfg_.spawn_half),
                               s.rng.uniform(-cfg_.spawn_half, cfg_.spawn_half));
    Eigen::Matrix<double, 3, 3> obst;  // rows: (cx, cy, r)
    for (int k = 0; k < cfg_.n_obstacles; ++k) {
      obst(k, 0) = s.rng.uniform(-cfg_.spawn_half, cfg_.spawn_half);
      obst(k, 1) = s.rng.uniform(-cfg_.spawn_half, cfg_.spawn_half);
      obst(k, 2) = s.rng.uniform(cfg_.obstacle_r_lo, cfg_.obstacle_r_hi);
    }

    if ((start - goal).norm() < cfg_.min_start_goal_dist) continue;
    bool ok = true;
    bool blocked = false;
    for (int k = 0; k < cfg_.n_obstacles && ok; ++k) {
      const Eigen::Vector2d c = obst.row(k).head(2);
      const double r = obst(k, 2);
      // Start must be safely outside; goal reachable without touching.
      if ((start - c).norm() <= r + cfg_.margin + 0.2) ok = false;
      if ((goal - c).norm() <= r + cfg_.goal_radius + 0.1) ok = false;
      if (segment_intersects_disc(start, goal, c, r)) blocked = true;
    }
    if (!ok || !blocked) continue;

    s.x.head(2) = start;
    s.x.segment(2, 2).setZero();  // resting start keeps the braking invariant
    s.x.segment(4, 2) = goal;
    for (int k = 0; k < cfg_.n_obstacles; ++k) s.x.segment(6 + 3 * k, 3) = obst.row(k);
    return s;
  }
  throw NumericalError("seeker reset: sampling budget exhausted");
}

StepResult SeekerEnv::step(EnvState s, const Eigen::VectorXd& u) const {
  if (u.size() != 2) throw DimensionError("seeker step: action dim != 2");
  if (u.lpNorm<Eigen::Infinity>() > cfg_.a_max + 1e-6)
    throw NumericalError("seeker step: acceleration bound violated");

  const Eigen::Vector2d e = s.x.head(2);
  const Eigen::Vector2d v = s.x.segment(2, 2);
  const Eigen::Vector2d goal = s.x.segment(4, 2);
  const double reward = -1.0 + std::exp(-(e - goal).norm());

  StepResult r;
  r.next = s;
  r.next.x.head(2) = e + cfg_.dt * v;
  r.next.x.segment(2, 2) = v + cfg_.dt * u.head(2);
  r.next.t = s.t + 1;
  r.reward = reward;
  const double goal_dist = (r.next.x.head(2) - goal).norm();
  r.done = goal_dist <= cfg_.goal_radius || r.next.t >= cfg_.horizon;
  r.applied = u;
  return r;
}

bool SeekerEnv::certify_box(const EnvState& s, const Eigen::Vector2d& lo,
                            const Eigen::Vector2d& hi) const {
  const double dt = cfg_.dt;
  Eigen::Vector2d p_lo = s.x.head(2) + dt * s.x.segment(2, 2);
  Eigen::Vector2d p_hi = p_lo;  // position after the action step is action-independent
  Eigen::Vector2d v_lo = s.x.segment(2, 2) + dt * lo;
  Eigen::Vector2d v_hi = s.x.segment(2, 2) + dt * hi;

  const auto rect_safe = [&](const Eigen::Vector2d& rlo, const Eigen::Vector2d& rhi) {
    if (rlo.minCoeff() < -cfg_.map_half || rhi.maxCoeff() > cfg_.map_half) return false;
    for (int k = 0; k < cfg_.n_obstacles; ++k) {
      const Eigen::Vector2d c = s.x.segment(6 + 3 * k, 2);
      const double r = s.x(6 + 3 * k + 2);
      if (point_rect_dist(c, rlo, rhi) <= r + cfg_.margin) return false;
    }
    return true;
  };

  const auto brake = [&](double v) {
    // Exact stop once one step suffices; avoids a rounding tail.
    if (std::abs(v) <= dt * cfg_.a_max) return 0.0;
    return v - dt * sgn(v) * cfg_.a_max;
  };

  if (!rect_safe(p_lo, p_hi)) return false;
  for (int k = 0; k < 10000; ++k) {
    if (v_lo.isZero(0.0) && v_hi.isZero(0.0)) return true;
    p_lo += dt * v_lo;
    p_hi += dt * v_hi;
    for (int i = 0; i < 2; ++i) {
      v_lo(i) = brake(v_lo(i));
      v_hi(i) = brake(v_hi(i));
    }
    const Eigen::Vector2d rlo = p_lo.cwiseMin(p_hi);
    const Eigen::Vector2d rhi = p_lo.cwiseMax(p_hi);
    if (!rect_safe(rlo, rhi)) return false;
  }
  throw NumericalError("seeker braking certificate did not terminate");
}

std::optional<std::pair<Eigen::Vector2d, Eigen::Vector2d>> SeekerEnv::braking_box(
    const EnvState& s) const {
  const Eigen::Vector2d full_lo = Eigen::Vector2d::Constant(-cfg_.a_max);
  const Eigen::Vector2d full_hi = Eigen::Vector2d::Constant(cfg_.a_max);
  if (certify_box(s, full_lo, full_hi)) return std::make_pair(full_lo, full_hi);

  const Eigen::Vector2d v = s.x.segment(2, 2);
  Eigen::Vector2d a_brake;
  for (int i = 0; i < 2; ++i)
    a_brake(i) = -sgn(v(i)) * std::min(cfg_.a_max, std::abs(v(i)) / cfg_.dt);
  if (!certify_box(s, a_brake, a_brake)) return std::nullopt;

  // Largest certified interpolation between the braking point and the full
  // box; growth is monotone in lambda, so bisection applies.
  const auto box_at = [&](double lam) {
    const Eigen::Vector2d lo = a_brake + lam * (full_lo - a_brake);
    const Eigen::Vector2d hi = a_brake + lam * (full_hi - a_brake);
    return std::make_pair(lo, hi);
  };
  double lam_ok = 0.0, lam_bad = 1.0;
  for (int it = 0; it < 24; ++it) {
    const double mid = 0.5 * (lam_ok + lam_bad);
    const auto [lo, hi] = box_at(mid);
    if (certify_box(s, lo, hi))
      lam_ok = mid;
    else
      lam_bad = mid;
  }
  return box_at(lam_ok);
}

std::optional<SafeActionSet> SeekerEnv::safe_action_set(const EnvState& s) const {
  const auto box = braking_box(s);
  if (!box) return std::nullopt;
  return SafeActionSet::direct(Zonotope::box(box->first, box->second));
}

}  // namespace saferl
