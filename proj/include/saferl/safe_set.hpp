#pragma once

#include <Eigen/Dense>
#include <optional>

#include "saferl/constraints.hpp"
#include "saferl/qp.hpp"
#include "saferl/zonotope.hpp"

namespace saferl {

// State-dependent safe action set in one of two modes.
//
// Direct: the set is a zonotope in action space; membership is encoded
// through factors nu.
//
// ReachContain: actions are safe when the one-step reachable set
// <A x + B u + c + c_W, G_W> is contained in the safe-state zonotope X_phi.
// The Gamma block of the containment condition involves only constant data
// (G_W, generators of X_phi), so it is solved once via least squares at
// construction and folded into per-row omega budgets; the per-state system
// then carries (u, omega) only.
class SafeActionSet {
 public:
  SafeActionSet() = default;  // empty shell; assign from a factory before use

  static SafeActionSet direct(Zonotope u_set);
  static SafeActionSet reach_contain(AffineDynamics dyn, Zonotope w, Zonotope x_phi,
                                     const Eigen::VectorXd& action_lo,
                                     const Eigen::VectorXd& action_hi);

  bool is_direct() const { return direct_.has_value(); }
  Eigen::Index action_dim() const;

  // Constraint system for the given state; for direct sets the state is
  // ignored (the zonotope already encodes it).
  ContainmentConstraints constraints(const Eigen::VectorXd& x) const;

  // Accessors used by environments and tests.
  const Zonotope& direct_set() const;
  const Zonotope& safe_states() const;
  const AffineDynamics& dynamics() const;
  const Zonotope& disturbance() const;
  const Eigen::VectorXd& omega_budget() const;

 private:
  std::optional<Zonotope> direct_;

  // reach-contain data
  AffineDynamics dyn_;
  Zonotope w_;
  Zonotope x_phi_;
  Eigen::VectorXd budget_;  // 1 - row sums of |Gamma*|
  Eigen::VectorXd action_lo_, action_hi_;
};

// Closest-point projection of u onto the safe action set at state x.
// status Infeasible means the safe set is empty at x (x outside the domain);
// MaxIter is a solver failure and must be treated as a hard error upstream.
ProjectionSolution project(const SafeActionSet& set, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u);

// Membership of u to tolerance kEpsFeas, via the pinned-action probe.
bool is_safe_action(const SafeActionSet& set, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& u);

}  // namespace saferl
