#include "saferl/safe_set.hpp"

#include <utility>

#include "saferl/constants.hpp"
#include "saferl/errors.hpp"

namespace saferl {

SafeActionSet SafeActionSet::direct(Zonotope u_set) {
  u_set.validate();
  SafeActionSet s;
  s.direct_ = std::move(u_set);
  return s;
}

SafeActionSet SafeActionSet::reach_contain(AffineDynamics dyn, Zonotope w, Zonotope x_phi,
                                           const Eigen::VectorXd& action_lo,
                                           const Eigen::VectorXd& action_hi) {
  dyn.validate();
  w.validate();
  x_phi.validate();
  if (w.dim() != dyn.state_dim() || x_phi.dim() != dyn.state_dim())
    throw DimensionError("reach_contain: W/X_phi dimension mismatch with dynamics");
  if (action_lo.size() != dyn.action_dim() || action_hi.size() != dyn.action_dim())
    throw DimensionError("reach_contain: action bounds dimension mismatch");

  SafeActionSet s;
  s.dyn_ = std::move(dyn);
  s.w_ = std::move(w);
  s.x_phi_ = std::move(x_phi);
  s.action_lo_ = action_lo;
  s.action_hi_ = action_hi;

  // Least-squares Gamma with B2 Gamma = G_W, folded into omega budgets.
  const Eigen::MatrixXd& b2 = s.x_phi_.generators;
  const Eigen::Index e2 = b2.cols();
  s.budget_ = Eigen::VectorXd::Ones(e2);
  if (s.w_.num_generators() > 0) {
    Eigen::MatrixXd gamma =
        b2.completeOrthogonalDecomposition().solve(s.w_.generators);
    const Eigen::VectorXd residual =
        (b2 * gamma - s.w_.generators).colwise().norm();
    if (residual.maxCoeff() > 1e-9)
      throw NumericalError(
          "reach_contain: disturbance generators not representable in X_phi");
    s.budget_ -= gamma.cwiseAbs().rowwise().sum();
    if (s.budget_.minCoeff() <= 0.0)
      throw NumericalError(
          "reach_contain: disturbance too large for the safe-state zonotope");
  }
  return s;
}

Eigen::Index SafeActionSet::action_dim() const {
  return direct_ ? direct_->dim() : dyn_.action_dim();
}

ContainmentConstraints SafeActionSet::constraints(const Eigen::VectorXd& x) const {
  if (direct_) return direct_membership_constraints(*direct_);

  if (x.size() != dyn_.state_dim())
    throw DimensionError("safe set constraints: state dim mismatch");
  const Eigen::Index na = dyn_.action_dim();
  const Eigen::Index nz = dyn_.state_dim();
  const Eigen::MatrixXd& b2 = x_phi_.generators;
  const Eigen::Index e2 = b2.cols();

  // B2 omega + B_dyn u = c2 - A x - c_dyn - c_W,  |omega_i| <= budget_i,
  // plus the actuation box on u.
  ContainmentConstraints c;
  c.n_action = na;
  c.n_aux = e2;
  c.A_eq.resize(nz, na + e2);
  c.A_eq.leftCols(na) = dyn_.b;
  c.A_eq.rightCols(e2) = b2;
  c.b_eq = x_phi_.center - dyn_.a * x - dyn_.c - w_.center;

  c.A_in.setZero(2 * e2, na + e2);
  c.b_in.resize(2 * e2);
  for (Eigen::Index i = 0; i < e2; ++i) {
    c.A_in(2 * i, na + i) = 1.0;
    c.b_in(2 * i) = budget_(i);
    c.A_in(2 * i + 1, na + i) = -1.0;
    c.b_in(2 * i + 1) = budget_(i);
  }
  c.add_action_box(action_lo_, action_hi_);
  c.validate();
  return c;
}

const Zonotope& SafeActionSet::direct_set() const {
  if (!direct_) throw DimensionError("direct_set: not a direct safe set");
  return *direct_;
}
const Zonotope& SafeActionSet::safe_states() const { return x_phi_; }
const AffineDynamics& SafeActionSet::dynamics() const { return dyn_; }
const Zonotope& SafeActionSet::disturbance() const { return w_; }
const Eigen::VectorXd& SafeActionSet::omega_budget() const { return budget_; }

ProjectionSolution project(const SafeActionSet& set, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u) {
  if (u.size() != set.action_dim()) throw DimensionError("project: u dim mismatch");
  return project_onto(set.constraints(x), u);
}

bool is_safe_action(const SafeActionSet& set, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& u) {
  return feasibility_probe(set.constraints(x), u).feasible;
}

}  // namespace saferl
