#pragma once

#include <Eigen/Dense>

#include "saferl/constraints.hpp"
#include "saferl/qp.hpp"

namespace saferl {

// Jacobian of the safeguard output with respect to its action input,
// obtained from the implicit function theorem on the reduced KKT system of
// the projection QP. On a face of the safe set the map is an affine
// orthogonal projection, so J is symmetric and idempotent; its null space
// (normal_basis) spans the directions the safeguard eliminates.
struct SafeguardJacobian {
  Eigen::MatrixXd j;             // action_dim x action_dim
  int active_rank = 0;           // rank of J = action_dim - #independent active constraints
  Eigen::MatrixXd normal_basis;  // columns span null(J)
  bool singular = false;         // SingularKkt: ill-conditioned reduced system
};

// sol must be a Solved projection on these constraints. Inequality rows are
// included only when strongly active (slack within kEpsAct and dual at least
// kEpsAct); weakly active rows are treated as inactive, which picks the
// larger-rank subgradient at degenerate points and keeps the map
// deterministic. A short-circuited (feasible input) solution yields J = I
// exactly.
SafeguardJacobian safeguard_jacobian(const ProjectionSolution& sol,
                                     const ContainmentConstraints& constraints);

}  // namespace saferl
