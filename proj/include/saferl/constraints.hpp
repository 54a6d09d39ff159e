#pragma once

#include <Eigen/Dense>

#include "saferl/zonotope.hpp"

namespace saferl {

// Linear constraint system over a stacked decision vector z = [u; aux],
// where u is the action block (may be empty for pure feasibility problems)
// and aux holds containment variables (Gamma, omega) or membership factors nu.
//
//   A_eq z  = b_eq
//   A_in z <= b_in
struct ContainmentConstraints {
  Eigen::Index n_action = 0;
  Eigen::Index n_aux = 0;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;

  Eigen::Index n_vars() const { return n_action + n_aux; }
  Eigen::Index n_eq() const { return A_eq.rows(); }
  Eigen::Index n_in() const { return A_in.rows(); }

  // Largest violation of z over all rows (0 when feasible).
  double violation(const Eigen::VectorXd& z) const;

  void validate() const;

  // Appends |u_i - mid_i| <= half_i rows on the action block.
  void add_action_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
};

// Containment of `inner` in `outer` (shared ambient dimension) as a linear
// feasibility system in aux = [vec(Gamma); omega]:
//   B2 Gamma = B1,   B2 omega = c2 - c1,
//   sum_k |Gamma_ik| + |omega_i| <= 1 for each row i,
// with the row-sum bound expanded into sign-enumerated linear rows.
// Feasibility implies inner ⊆ outer (sufficient, not necessary).
// Throws DimensionError on mismatch; inner generator counts above 9 are
// rejected (sign enumeration is exponential in eta_inner).
ContainmentConstraints containment_constraints(const Zonotope& inner, const Zonotope& outer);

// Membership u ∈ u_set as a system in z = [u; nu]:
//   B nu - u = -c,   |nu_j| <= 1 componentwise.
ContainmentConstraints direct_membership_constraints(const Zonotope& u_set);

// One-step reachable set under affine dynamics x' = A x + B u + c plus the
// disturbance zonotope W (already expressed in state coordinates):
//   Reach = <A x + B u + c + center(W), generators(W)>.
struct AffineDynamics {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::VectorXd c;

  Eigen::Index state_dim() const { return a.rows(); }
  Eigen::Index action_dim() const { return b.cols(); }
  void validate() const;
};

Zonotope reachable_set(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       const AffineDynamics& dyn, const Zonotope& w);

}  // namespace saferl
