#include "saferl/batch_kernels.hpp"

#include "saferl/errors.hpp"

namespace saferl {

namespace {

std::vector<SafeguardedAction> run_batch(const Env& env, const Eigen::MatrixXd& xs,
                                         const Eigen::MatrixXd& us, bool want_jacobian,
                                         const std::vector<bool>& skip, bool parallel) {
  if (xs.cols() != us.cols()) throw DimensionError("safeguard batch: column count mismatch");
  if (!skip.empty() && Eigen::Index(skip.size()) != xs.cols())
    throw DimensionError("safeguard batch: skip mask size mismatch");
  const Eigen::Index n = xs.cols();
  std::vector<SafeguardedAction> out;
  out.resize(size_t(n));

#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!skip.empty() && skip[size_t(i)]) {
      out[size_t(i)].u_phi = us.col(i);
      continue;
    }
    EnvState s;
    s.x = xs.col(i);
    out[size_t(i)] = sp_safeguard(env, s, us.col(i), want_jacobian);
  }
  return out;
}

}  // namespace

std::vector<SafeguardedAction> sp_safeguard_batch(const Env& env, const Eigen::MatrixXd& xs,
                                                  const Eigen::MatrixXd& us,
                                                  bool want_jacobian,
                                                  const std::vector<bool>& skip) {
  return run_batch(env, xs, us, want_jacobian, skip, true);
}

std::vector<SafeguardedAction> sp_safeguard_batch_serial(const Env& env,
                                                         const Eigen::MatrixXd& xs,
                                                         const Eigen::MatrixXd& us,
                                                         bool want_jacobian,
                                                         const std::vector<bool>& skip) {
  return run_batch(env, xs, us, want_jacobian, skip, false);
}

}  // namespace saferl
