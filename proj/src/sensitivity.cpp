#include "saferl/sensitivity.hpp"

#include <cmath>
#include <vector>

#include "saferl/constants.hpp"
#include "saferl/errors.hpp"

namespace saferl {

SafeguardJacobian safeguard_jacobian(const ProjectionSolution& sol,
                                     const ContainmentConstraints& c) {
  if (sol.status != QpStatus::Solved)
    throw NumericalError("safeguard_jacobian: projection not solved");
  const Eigen::Index na = c.n_action;
  const Eigen::Index nx = c.n_aux;
  const Eigen::Index n = na + nx;
  if (sol.z.size() != n) throw DimensionError("safeguard_jacobian: solution size mismatch");

  SafeguardJacobian out;

  // Strongly active inequality rows: tight slack and a dual that clears the
  // weak-activity threshold.
  std::vector<int> act;
  if (!sol.short_circuit) {
    for (int i : sol.active_set)
      if (sol.duals_ineq(i) >= kEpsAct) act.push_back(i);
  }

  if (act.empty() && c.n_eq() == 0) {
    out.j = Eigen::MatrixXd::Identity(na, na);
    out.active_rank = int(na);
    out.normal_basis.resize(na, 0);
    return out;
  }
  if (sol.short_circuit) {
    // Projection is locally the identity around a feasible input.
    out.j = Eigen::MatrixXd::Identity(na, na);
    out.active_rank = int(na);
    out.normal_basis.resize(na, 0);
    return out;
  }

  // Reduced KKT matrix: [H  A_eq'  N_a'; A_eq 0 0; N_a 0 0]; differentiating
  // the KKT map in u only perturbs the stationarity rows of the action
  // block, so J is the action block of M^-1 [I; 0; 0].
  const Eigen::Index p = c.n_eq();
  const Eigen::Index q = Eigen::Index(act.size());
  const Eigen::Index dim = n + p + q;

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  m.topLeftCorner(na, na).setIdentity();
  m.block(na, na, nx, nx) = kQpAuxReg * Eigen::MatrixXd::Identity(nx, nx);
  if (p > 0) {
    m.block(n, 0, p, n) = c.A_eq;
    m.block(0, n, n, p) = c.A_eq.transpose();
  }
  for (Eigen::Index k = 0; k < q; ++k) {
    m.row(n + p + k).head(n) = c.A_in.row(act[k]);
    m.col(n + p + k).head(n) = c.A_in.row(act[k]).transpose();
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
  if (!lu.isInvertible() || diag.minCoeff() <= 0.0 ||
      diag.maxCoeff() / diag.minCoeff() > kKktCondLimit) {
    out.singular = true;
    out.j = Eigen::MatrixXd::Zero(na, na);
    out.active_rank = 0;
    out.normal_basis = Eigen::MatrixXd::Identity(na, na);
    return out;
  }

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(dim, na);
  rhs.topRows(na).setIdentity();
  const Eigen::MatrixXd x = lu.solve(rhs);
  out.j = x.topRows(na);

  // Rank and normal directions from the spectrum; J is a projector up to
  // the auxiliary regularization, so eigenvalues cluster at 0 and 1.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (out.j + out.j.transpose()));
  int rank = 0;
  std::vector<int> null_cols;
  for (Eigen::Index i = 0; i < na; ++i) {
    if (es.eigenvalues()(i) > 0.5)
      ++rank;
    else
      null_cols.push_back(int(i));
  }
  out.active_rank = rank;
  out.normal_basis.resize(na, Eigen::Index(null_cols.size()));
  for (size_t k = 0; k < null_cols.size(); ++k)
    out.normal_basis.col(Eigen::Index(k)) = es.eigenvectors().col(null_cols[k]);
  return out;
}

}  // namespace saferl
