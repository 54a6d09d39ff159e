#include "saferl/qp.hpp"

#include <cmath>
#include <limits>

#include "saferl/constants.hpp"
#include "saferl/errors.hpp"

namespace saferl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDepTol = 1e-12;   // dependent-normal threshold on |z|
constexpr double kViolTol = 1e-10;  // constraint counts as violated below -kViolTol

// Goldfarb–Idnani dual active-set solver on normalized rows. Maintains the
// QR-style factors J = L^-T Q and upper-triangular R of the active normals
// in the metric of H, as in the original paper.
class DualActiveSet {
 public:
  DualActiveSet(const Eigen::MatrixXd& h, const Eigen::VectorXd& f,
                const ContainmentConstraints& c)
      : n_(h.rows()), p_(c.n_eq()), m_(c.n_in()) {
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success)
      throw NumericalError("solve_qp: H is not positive definite");

    // Normalize rows to unit 2-norm; zero rows are resolved immediately.
    normals_.resize(p_ + m_);
    offsets_.resize(p_ + m_);
    scales_.resize(p_ + m_);
    for (Eigen::Index i = 0; i < p_ + m_; ++i) {
      Eigen::VectorXd row =
          i < p_ ? c.A_eq.row(i).transpose() : c.A_in.row(i - p_).transpose();
      double b = i < p_ ? c.b_eq(i) : c.b_in(i - p_);
      const double s = row.norm();
      scales_[i] = s;
      if (s > 0) {
        row /= s;
        b /= s;
      }
      normals_[i] = std::move(row);
      offsets_[i] = b;
    }

    x_ = llt.solve(-f);
    j_ = llt.matrixL().transpose().solve(Eigen::MatrixXd::Identity(n_, n_));
    r_.setZero(n_, n_);
    d_.resize(n_);
    active_.reserve(n_);
    u_.setZero(n_ + 1);
  }

  QpStatus run() {
    if (!add_equalities()) return QpStatus::Infeasible;

    for (iterations_ = 0; iterations_ < kQpMaxIter; ++iterations_) {
      // Most violated inequality in >=-form slack; ties -> lowest index.
      int worst = -1;
      double worst_s = -kViolTol;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (is_active(int(p_ + i))) continue;
        if (scales_[p_ + i] == 0.0) continue;
        const double s = offsets_[p_ + i] - normals_[p_ + i].dot(x_);  // >= 0 wanted
        if (s < worst_s) {
          worst_s = s;
          worst = int(p_ + i);
        }
      }
      if (worst < 0) return QpStatus::Solved;
      if (!add_inequality(worst)) return QpStatus::Infeasible;
    }
    return QpStatus::MaxIter;
  }

  // Raw zero-row check before running; returns false on a trivially
  // infeasible row (0'z = b != 0 or 0'z <= b < 0).
  bool zero_rows_consistent(const ContainmentConstraints& c) const {
    for (Eigen::Index i = 0; i < p_; ++i)
      if (scales_[i] == 0.0 && std::abs(c.b_eq(i)) > kViolTol) return false;
    for (Eigen::Index i = 0; i < m_; ++i)
      if (scales_[p_ + i] == 0.0 && c.b_in(i) < -kViolTol) return false;
    return true;
  }

  const Eigen::VectorXd& x() const { return x_; }
  int iterations() const { return iterations_; }

  // Duals in the <=-form convention: kappa for equalities (free sign),
  // upsilon >= 0 for inequalities, rescaled back to the original rows.
  void extract_duals(Eigen::VectorXd& kappa, Eigen::VectorXd& upsilon,
                     std::vector<int>& active_ineq) const {
    kappa.setZero(p_);
    upsilon.setZero(m_);
    active_ineq.clear();
    for (int k = 0; k < q_; ++k) {
      const int id = active_[k];
      const double scale = scales_[id] > 0 ? scales_[id] : 1.0;
      if (id < p_) {
        kappa(id) = -u_(k) / scale;
      } else {
        upsilon(id - p_) = u_(k) / scale;
        active_ineq.push_back(id - int(p_));
      }
    }
  }

 private:
  bool is_active(int id) const {
    for (int k = 0; k < q_; ++k)
      if (active_[k] == id) return true;
    return false;
  }

  // In >=-form the normal of inequality i is -A_in.row(i); equalities keep
  // their sign and are never dropped.
  Eigen::VectorXd ge_normal(int id) const {
    return id < p_ ? normals_[id] : Eigen::VectorXd(-normals_[id]);
  }
  double ge_offset(int id) const { return id < p_ ? offsets_[id] : -offsets_[id]; }

  void compute_step(const Eigen::VectorXd& np, Eigen::VectorXd& z, Eigen::VectorXd& r) const {
    d_ = j_.transpose() * np;
    z = j_.rightCols(n_ - q_) * d_.tail(n_ - q_);
    if (q_ > 0)
      r = r_.topLeftCorner(q_, q_).triangularView<Eigen::Upper>().solve(d_.head(q_));
    else
      r.resize(0);
  }

  bool add_to_factors(int id) {
    // Givens rotations zero d below position q_, accumulated into J.
    for (Eigen::Index k = n_ - 1; k > q_; --k) {
      const double cc = d_(k - 1), ss = d_(k);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      const double cth = cc / h, sth = ss / h;
      d_(k - 1) = h;
      d_(k) = 0.0;
      const Eigen::VectorXd t1 = j_.col(k - 1);
      j_.col(k - 1) = cth * t1 + sth * j_.col(k);
      j_.col(k) = -sth * t1 + cth * j_.col(k).eval();
    }
    if (std::abs(d_(q_)) < kDepTol) return false;  // dependent normal
    active_.push_back(id);
    r_.col(q_).head(q_ + 1) = d_.head(q_ + 1);
    ++q_;
    return true;
  }

  void drop_constraint(int pos) {
    // Shift active entries/duals/R columns left, then re-triangularize.
    for (int k = pos; k < q_ - 1; ++k) {
      active_[k] = active_[k + 1];
      u_(k) = u_(k + 1);
      r_.col(k).head(q_) = r_.col(k + 1).head(q_);
    }
    active_.pop_back();
    u_(q_ - 1) = 0.0;
    r_.col(q_ - 1).setZero();
    --q_;
    for (int j = pos; j < q_; ++j) {
      const double cc = r_(j, j), ss = r_(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      const double cth = cc / h, sth = ss / h;
      for (int col = j; col < q_; ++col) {
        const double t1 = r_(j, col), t2 = r_(j + 1, col);
        r_(j, col) = cth * t1 + sth * t2;
        r_(j + 1, col) = -sth * t1 + cth * t2;
      }
      r_(j + 1, j) = 0.0;
      const Eigen::VectorXd t1 = j_.col(j);
      j_.col(j) = cth * t1 + sth * j_.col(j + 1);
      j_.col(j + 1) = -sth * t1 + cth * j_.col(j + 1).eval();
    }
  }

  bool add_equalities() {
    for (int id = 0; id < p_; ++id) {
      if (scales_[id] == 0.0) continue;
      const Eigen::VectorXd np = ge_normal(id);
      Eigen::VectorXd z, r;
      compute_step(np, z, r);
      const double s = np.dot(x_) - ge_offset(id);
      if (z.lpNorm<Eigen::Infinity>() <= kDepTol) {
        if (std::abs(s) > 1e-9) return false;  // inconsistent equalities
        continue;                              // redundant row, dual stays 0
      }
      const double t = -s / np.dot(z);
      x_ += t * z;
      if (q_ > 0) u_.head(q_) -= t * r;
      u_(q_) = t;
      if (!add_to_factors(id)) return false;
    }
    return true;
  }

  bool add_inequality(int id) {
    const Eigen::VectorXd np = ge_normal(id);
    double u_new = 0.0;
    for (int inner = 0; inner < kQpMaxIter; ++inner) {
      Eigen::VectorXd z, r;
      compute_step(np, z, r);

      // Max dual step before an active inequality dual hits zero.
      double t1 = kInf;
      int drop = -1;
      for (int k = 0; k < q_; ++k) {
        if (active_[k] < p_) continue;  // equalities stay
        if (r(k) > kDepTol) {
          const double t = u_(k) / r(k);
          if (t < t1) {
            t1 = t;
            drop = k;
          }
        }
      }
      const double ztn = z.lpNorm<Eigen::Infinity>() > kDepTol ? np.dot(z) : 0.0;
      const double s = np.dot(x_) - ge_offset(id);  // negative while violated
      const double t2 = ztn > 0.0 ? -s / ztn : kInf;
      const double t = std::min(t1, t2);

      if (t == kInf) return false;  // dual unbounded: primal infeasible

      if (ztn > 0.0) {
        x_ += t * z;
        if (q_ > 0) u_.head(q_) -= t * r;
        u_new += t;
      } else {
        if (q_ > 0) u_.head(q_) -= t * r;
        u_new += t;
      }

      if (t == t2 && ztn > 0.0) {
        u_(q_) = u_new;
        if (!add_to_factors(id))
          throw NumericalError("solve_qp: factor update failed on independent normal");
        return true;
      }
      drop_constraint(drop);
    }
    throw NumericalError("solve_qp: inner add/drop loop exceeded iteration cap");
  }

  Eigen::Index n_, p_, m_;
  std::vector<Eigen::VectorXd> normals_;
  std::vector<double> offsets_;
  std::vector<double> scales_;
  Eigen::VectorXd x_;
  Eigen::MatrixXd j_;
  Eigen::MatrixXd r_;
  mutable Eigen::VectorXd d_;
  std::vector<int> active_;
  Eigen::VectorXd u_;
  int q_ = 0;
  int iterations_ = 0;
};

double kkt_residual(const Eigen::MatrixXd& h, const Eigen::VectorXd& f,
                    const ContainmentConstraints& c, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& kappa, const Eigen::VectorXd& upsilon) {
  Eigen::VectorXd stat = h * z + f;
  if (c.n_eq() > 0) stat += c.A_eq.transpose() * kappa;
  if (c.n_in() > 0) stat += c.A_in.transpose() * upsilon;
  double res = stat.lpNorm<Eigen::Infinity>();
  if (c.n_eq() > 0) res = std::max(res, (c.A_eq * z - c.b_eq).lpNorm<Eigen::Infinity>());
  if (c.n_in() > 0) {
    const Eigen::VectorXd slack = c.A_in * z - c.b_in;
    res = std::max(res, std::max(0.0, slack.maxCoeff()));
    res = std::max(res, (upsilon.array() * slack.array()).abs().maxCoeff());
    res = std::max(res, std::max(0.0, -upsilon.minCoeff()));
  }
  return res;
}

std::vector<int> slack_active_set(const ContainmentConstraints& c, const Eigen::VectorXd& z) {
  std::vector<int> act;
  if (c.n_in() == 0) return act;
  const Eigen::VectorXd slack = c.A_in * z - c.b_in;
  for (Eigen::Index i = 0; i < c.n_in(); ++i) {
    const double scale = std::max(1.0, c.A_in.row(i).norm());
    if (std::abs(slack(i)) <= kEpsAct * scale) act.push_back(int(i));
  }
  return act;
}

// Re-solve the equality-constrained QP fixed by the final active set; this
// polishes the primal/dual pair to near machine precision.
bool refine(const Eigen::MatrixXd& h, const Eigen::VectorXd& f,
            const ContainmentConstraints& c, const std::vector<int>& active_ineq,
            Eigen::VectorXd& z, Eigen::VectorXd& kappa, Eigen::VectorXd& upsilon) {
  const Eigen::Index n = h.rows();
  const Eigen::Index p = c.n_eq();
  const Eigen::Index q = Eigen::Index(active_ineq.size());
  const Eigen::Index dim = n + p + q;

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs(dim);
  m.topLeftCorner(n, n) = h;
  rhs.head(n) = -f;
  if (p > 0) {
    m.block(n, 0, p, n) = c.A_eq;
    m.block(0, n, n, p) = c.A_eq.transpose();
    rhs.segment(n, p) = c.b_eq;
  }
  for (Eigen::Index k = 0; k < q; ++k) {
    m.row(n + p + k).head(n) = c.A_in.row(active_ineq[k]);
    m.col(n + p + k).head(n) = c.A_in.row(active_ineq[k]).transpose();
    rhs(n + p + k) = c.b_in(active_ineq[k]);
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) return false;
  Eigen::VectorXd sol = lu.solve(rhs);
  // One iterative refinement pass.
  sol += lu.solve(rhs - m * sol);

  Eigen::VectorXd ups_ref = Eigen::VectorXd::Zero(c.n_in());
  for (Eigen::Index k = 0; k < q; ++k) {
    const double v = sol(n + p + k);
    if (v < -kEpsKkt) return false;  // active set disagrees; keep solver result
    ups_ref(active_ineq[k]) = std::max(v, 0.0);
  }
  z = sol.head(n);
  kappa = sol.segment(n, p);
  upsilon = ups_ref;
  return true;
}

}  // namespace

ProjectionSolution solve_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& f,
                            const ContainmentConstraints& constraints) {
  constraints.validate();
  if (h.rows() != h.cols() || h.rows() != constraints.n_vars() || f.size() != h.rows())
    throw DimensionError("solve_qp: H/f size mismatch with constraints");

  ProjectionSolution sol;
  DualActiveSet solver(h, f, constraints);
  if (!solver.zero_rows_consistent(constraints)) {
    sol.status = QpStatus::Infeasible;
    return sol;
  }
  sol.status = solver.run();
  sol.iterations = solver.iterations();
  if (sol.status != QpStatus::Solved) return sol;

  sol.z = solver.x();
  std::vector<int> active_ineq;
  solver.extract_duals(sol.duals_eq, sol.duals_ineq, active_ineq);

  Eigen::VectorXd z_ref = sol.z, kappa_ref = sol.duals_eq, ups_ref = sol.duals_ineq;
  if (refine(h, f, constraints, active_ineq, z_ref, kappa_ref, ups_ref)) {
    const double raw = kkt_residual(h, f, constraints, sol.z, sol.duals_eq, sol.duals_ineq);
    const double ref = kkt_residual(h, f, constraints, z_ref, kappa_ref, ups_ref);
    if (ref <= raw) {
      sol.z = z_ref;
      sol.duals_eq = kappa_ref;
      sol.duals_ineq = ups_ref;
    }
  }
  sol.kkt_residual =
      kkt_residual(h, f, constraints, sol.z, sol.duals_eq, sol.duals_ineq);
  sol.constraint_violation = constraints.violation(sol.z);
  sol.active_set = slack_active_set(constraints, sol.z);
  sol.u_phi = constraints.n_action > 0 ? sol.z.head(constraints.n_action) : sol.z;
  return sol;
}

ProbeResult feasibility_probe(const ContainmentConstraints& c, const Eigen::VectorXd& u) {
  if (u.size() != c.n_action) throw DimensionError("feasibility_probe: u size mismatch");
  ProbeResult out;
  const Eigen::Index na = c.n_action;
  const Eigen::Index nx = c.n_aux;

  // Rows without aux coefficients are direct checks on u.
  double direct_viol = 0.0;
  std::vector<int> aux_in_rows;
  for (Eigen::Index i = 0; i < c.n_in(); ++i) {
    if (nx == 0 || c.A_in.row(i).tail(nx).lpNorm<Eigen::Infinity>() == 0.0)
      direct_viol = std::max(direct_viol, c.A_in.row(i).head(na).dot(u) - c.b_in(i));
    else
      aux_in_rows.push_back(int(i));
  }
  if (direct_viol > kEpsFeas) {
    out.violation = direct_viol;
    return out;
  }
  if (nx == 0) {
    double eq_viol = c.n_eq() > 0 ? (c.A_eq.leftCols(na) * u - c.b_eq).cwiseAbs().maxCoeff() : 0.0;
    out.feasible = eq_viol <= kEpsFeas;
    out.violation = std::max(direct_viol, eq_viol);
    out.aux.resize(0);
    return out;
  }

  // Least-squares fit of the equality rows over aux, inside the aux
  // inequality rows: min 1/2 |E aux - r|^2 + reg/2 |aux|^2.
  Eigen::MatrixXd e = c.A_eq.rightCols(nx);
  Eigen::VectorXd r = c.b_eq - c.A_eq.leftCols(na) * u;
  ContainmentConstraints probe;
  probe.n_action = 0;
  probe.n_aux = nx;
  probe.A_eq.resize(0, nx);
  probe.b_eq.resize(0);
  probe.A_in.resize(aux_in_rows.size(), nx);
  probe.b_in.resize(aux_in_rows.size());
  for (size_t k = 0; k < aux_in_rows.size(); ++k) {
    const int i = aux_in_rows[k];
    probe.A_in.row(k) = c.A_in.row(i).tail(nx);
    probe.b_in(k) = c.b_in(i) - c.A_in.row(i).head(na).dot(u);
  }
  Eigen::MatrixXd h = e.transpose() * e;
  h.diagonal().array() += kQpAuxReg;
  const Eigen::VectorXd f = -e.transpose() * r;

  ProjectionSolution fit = solve_qp(h, f, probe);
  if (fit.status != QpStatus::Solved) {
    out.violation = kInf;
    return out;
  }
  const double eq_viol = (e * fit.z - r).lpNorm<Eigen::Infinity>();
  const double in_viol = probe.n_in() > 0
                             ? std::max(0.0, (probe.A_in * fit.z - probe.b_in).maxCoeff())
                             : 0.0;
  out.violation = std::max({direct_viol, eq_viol, in_viol});
  out.feasible = out.violation <= kEpsFeas;
  out.aux = fit.z;
  return out;
}

ProjectionSolution project_onto(const ContainmentConstraints& c, const Eigen::VectorXd& u) {
  if (u.size() != c.n_action) throw DimensionError("project_onto: u size mismatch");
  const Eigen::Index na = c.n_action;
  const Eigen::Index nx = c.n_aux;

  ProbeResult probe = feasibility_probe(c, u);
  if (probe.feasible) {
    ProjectionSolution sol;
    sol.u_phi = u;  // bit-exact identity on the safe set
    sol.z.resize(na + nx);
    sol.z.head(na) = u;
    if (nx > 0) sol.z.tail(nx) = probe.aux;
    sol.duals_eq = Eigen::VectorXd::Zero(c.n_eq());
    sol.duals_ineq = Eigen::VectorXd::Zero(c.n_in());
    sol.active_set = slack_active_set(c, sol.z);
    sol.kkt_residual = 0.0;
    sol.constraint_violation = probe.violation;
    sol.iterations = 0;
    sol.status = QpStatus::Solved;
    sol.short_circuit = true;
    return sol;
  }

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(na + nx, na + nx);
  h.topLeftCorner(na, na).setIdentity();
  h.bottomRightCorner(nx, nx) = kQpAuxReg * Eigen::MatrixXd::Identity(nx, nx);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(na + nx);
  f.head(na) = -u;
  return solve_qp(h, f, c);
}

}  // namespace saferl
