#include "saferl/constraints.hpp"

#include "saferl/errors.hpp"

namespace saferl {

double ContainmentConstraints::violation(const Eigen::VectorXd& z) const {
  if (z.size() != n_vars()) throw DimensionError("violation: z size mismatch");
  double v = 0.0;
  if (n_eq() > 0) v = (A_eq * z - b_eq).cwiseAbs().maxCoeff();
  if (n_in() > 0) v = std::max(v, (A_in * z - b_in).maxCoeff());
  return std::max(v, 0.0);
}

void ContainmentConstraints::validate() const {
  if (A_eq.rows() != b_eq.size() || A_in.rows() != b_in.size())
    throw DimensionError("constraints: row/vector mismatch");
  if ((A_eq.rows() > 0 && A_eq.cols() != n_vars()) ||
      (A_in.rows() > 0 && A_in.cols() != n_vars()))
    throw DimensionError("constraints: column count != n_vars");
  if (!A_eq.allFinite() || !b_eq.allFinite() || !A_in.allFinite() || !b_in.allFinite())
    throw NumericalError("constraints: non-finite entries");
}

void ContainmentConstraints::add_action_box(const Eigen::VectorXd& lo,
                                            const Eigen::VectorXd& hi) {
  if (lo.size() != n_action || hi.size() != n_action)
    throw DimensionError("add_action_box: bounds size != n_action");
  const Eigen::Index rows0 = n_in();
  const Eigen::Index n = n_vars();
  A_in.conservativeResize(rows0 + 2 * n_action, n);
  b_in.conservativeResize(rows0 + 2 * n_action);
  A_in.bottomRows(2 * n_action).setZero();
  for (Eigen::Index i = 0; i < n_action; ++i) {
    A_in(rows0 + 2 * i, i) = 1.0;
    b_in(rows0 + 2 * i) = hi(i);
    A_in(rows0 + 2 * i + 1, i) = -1.0;
    b_in(rows0 + 2 * i + 1) = -lo(i);
  }
}

ContainmentConstraints containment_constraints(const Zonotope& inner, const Zonotope& outer) {
  if (inner.dim() != outer.dim())
    throw DimensionError("containment_constraints: ambient dimension mismatch");
  const Eigen::Index nz = inner.dim();
  const Eigen::Index e1 = inner.num_generators();
  const Eigen::Index e2 = outer.num_generators();
  if (e1 > 9)
    throw DimensionError("containment_constraints: inner generator count above enumeration cap");

  // aux = [Gamma (column-major, e2 x e1); omega (e2)]
  ContainmentConstraints c;
  c.n_action = 0;
  c.n_aux = e2 * e1 + e2;

  c.A_eq.setZero(nz * e1 + nz, c.n_aux);
  c.b_eq.resize(nz * e1 + nz);
  for (Eigen::Index k = 0; k < e1; ++k) {
    c.A_eq.block(k * nz, k * e2, nz, e2) = outer.generators;
    c.b_eq.segment(k * nz, nz) = inner.generators.col(k);
  }
  c.A_eq.block(e1 * nz, e1 * e2, nz, e2) = outer.generators;
  c.b_eq.segment(e1 * nz, nz) = outer.center - inner.center;

  // Row i of [Gamma omega]: sum_k s_k Gamma_ik + s_w omega_i <= 1 for all
  // sign patterns s; equivalent to sum_k |Gamma_ik| + |omega_i| <= 1.
  const Eigen::Index patterns = Eigen::Index(1) << (e1 + 1);
  c.A_in.setZero(e2 * patterns, c.n_aux);
  c.b_in.setOnes(e2 * patterns);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < e2; ++i) {
    for (Eigen::Index s = 0; s < patterns; ++s, ++row) {
      for (Eigen::Index k = 0; k < e1; ++k)
        c.A_in(row, k * e2 + i) = (s >> k) & 1 ? -1.0 : 1.0;
      c.A_in(row, e1 * e2 + i) = (s >> e1) & 1 ? -1.0 : 1.0;
    }
  }
  c.validate();
  return c;
}

ContainmentConstraints direct_membership_constraints(const Zonotope& u_set) {
  const Eigen::Index n = u_set.dim();
  const Eigen::Index eta = u_set.num_generators();

  ContainmentConstraints c;
  c.n_action = n;
  c.n_aux = eta;
  c.A_eq.setZero(n, n + eta);
  c.A_eq.leftCols(n) = -Eigen::MatrixXd::Identity(n, n);
  c.A_eq.rightCols(eta) = u_set.generators;
  c.b_eq = -u_set.center;

  c.A_in.setZero(2 * eta, n + eta);
  c.b_in.setOnes(2 * eta);
  for (Eigen::Index j = 0; j < eta; ++j) {
    c.A_in(2 * j, n + j) = 1.0;
    c.A_in(2 * j + 1, n + j) = -1.0;
  }
  c.validate();
  return c;
}

void AffineDynamics::validate() const {
  if (a.rows() != a.cols()) throw DimensionError("dynamics: A not square");
  if (b.rows() != a.rows() || c.size() != a.rows())
    throw DimensionError("dynamics: B/c rows != state dim");
  if (!a.allFinite() || !b.allFinite() || !c.allFinite())
    throw NumericalError("dynamics: non-finite entries");
}

Zonotope reachable_set(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       const AffineDynamics& dyn, const Zonotope& w) {
  dyn.validate();
  if (x.size() != dyn.state_dim()) throw DimensionError("reachable_set: x dim mismatch");
  if (u.size() != dyn.action_dim()) throw DimensionError("reachable_set: u dim mismatch");
  if (w.dim() != dyn.state_dim()) throw DimensionError("reachable_set: W dim mismatch");
  Zonotope r;
  r.center = dyn.a * x + dyn.b * u + dyn.c + w.center;
  r.generators = w.generators;
  return r;
}

}  // namespace saferl
