#pragma once

#include "saferl/env.hpp"

namespace saferl {

// Double-integrator navigation with pseudo-randomly sampled start, goal, and
// three disc obstacles, at least one of which blocks the straight line from
// start to goal. The policy observes (e - goal, v); the full state also
// carries goal and obstacle geometry so safe sets can be rebuilt from
// replayed states:
//   x = [e (2), v (2), goal (2), (cx, cy, radius) x 3]   (15 entries)
//
// The safe action set is the largest certified axis-aligned acceleration
// box: any action in the box, followed by per-axis maximal braking, keeps
// the whole trajectory outside the inflated obstacles and inside the map.
struct SeekerConfig {
  double dt = 0.1;
  double a_max = 1.0;
  int horizon = 100;
  double map_half = 5.0;
  double goal_radius = 0.3;
  double obstacle_r_lo = 0.5;
  double obstacle_r_hi = 1.5;
  double margin = 0.05;       // obstacle inflation for the braking certificate
  double spawn_half = 4.0;    // start/goal/obstacle centers sampled in this box
  double min_start_goal_dist = 3.0;
  int n_obstacles = 3;
  int reset_attempts = 10000;
};

class SeekerEnv final : public Env {
 public:
  explicit SeekerEnv(SeekerConfig cfg = {});

  std::string name() const override { return "seeker"; }
  Eigen::Index state_dim() const override { return 15; }
  Eigen::Index action_dim() const override { return 2; }
  Eigen::Index obs_dim() const override { return 4; }
  int horizon() const override { return cfg_.horizon; }
  Eigen::VectorXd action_lo() const override;
  Eigen::VectorXd action_hi() const override;
  Eigen::VectorXd obs(const EnvState& s) const override;
  EnvState reset(std::uint64_t seed) const override;
  StepResult step(EnvState s, const Eigen::VectorXd& u) const override;
  std::optional<SafeActionSet> safe_action_set(const EnvState& s) const override;

  const SeekerConfig& config() const { return cfg_; }

  // Largest certified braking box for (e, v) against the given obstacles,
  // as [lo, hi] per axis; nullopt when even the pure braking action fails.
  std::optional<std::pair<Eigen::Vector2d, Eigen::Vector2d>> braking_box(
      const EnvState& s) const;

  // The braking certificate itself, exposed for the oracle tests: simulates
  // one step with every corner-driven velocity interval of [lo, hi] and the
  // per-axis braking sequence after it.
  bool certify_box(const EnvState& s, const Eigen::Vector2d& lo,
                   const Eigen::Vector2d& hi) const;

  static bool segment_intersects_disc(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                      const Eigen::Vector2d& center, double radius);

 private:
  SeekerConfig cfg_;
};

}  // namespace saferl
