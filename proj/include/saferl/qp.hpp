#pragma once

#include <Eigen/Dense>
#include <vector>

#include "saferl/constraints.hpp"

namespace saferl {

enum class QpStatus { Solved, Infeasible, MaxIter };

// Primal-dual solution of the closest-point projection QP. duals_eq (kappa)
// pairs with the equality rows, duals_ineq (upsilon >= 0) with the
// inequality rows; inactive rows carry exact zeros. active_set lists the
// inequality rows with |slack| <= kEpsAct at the solution.
struct ProjectionSolution {
  Eigen::VectorXd u_phi;
  Eigen::VectorXd z;  // full primal, [u_phi; aux]
  Eigen::VectorXd duals_eq;
  Eigen::VectorXd duals_ineq;
  std::vector<int> active_set;
  double kkt_residual = 0.0;
  double constraint_violation = 0.0;
  int iterations = 0;
  QpStatus status = QpStatus::Solved;
  bool short_circuit = false;
};

// Strictly convex QP: minimize 1/2 z'Hz + f'z subject to the constraint
// system. Dual active-set method (Goldfarb–Idnani) with a final re-solve of
// the active KKT system. Deterministic: most-violated selection with
// lowest-index tie-breaking, no randomization. u_phi holds the leading
// n_action entries of z (the whole of z when n_action is 0).
ProjectionSolution solve_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& f,
                            const ContainmentConstraints& constraints);

// Closest point in the constraint set to u, penalizing only the action
// block; auxiliary variables carry the kQpAuxReg Tikhonov term. If u is
// already feasible (checked by a pinned-action feasibility probe before
// solving), returns u bit-exactly with zero duals.
ProjectionSolution project_onto(const ContainmentConstraints& constraints,
                                const Eigen::VectorXd& u);

// Feasibility of the constraint system with the action block pinned to u.
// Solved => a feasible aux exists with violation <= kEpsFeas (aux returned);
// not solved => either u is outside the set or the set is empty.
struct ProbeResult {
  bool feasible = false;
  Eigen::VectorXd aux;
  double violation = 0.0;
};
ProbeResult feasibility_probe(const ContainmentConstraints& constraints,
                              const Eigen::VectorXd& u);

}  // namespace saferl
