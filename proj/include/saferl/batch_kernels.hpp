#pragma once

#include <Eigen/Dense>
#include <vector>

#include "saferl/wiring.hpp"

namespace saferl {

// Batched safeguard projections over replayed states. xs holds one full
// environment state per column, us the matching actions. Samples are
// independent, so the omp loop writes into per-index slots and the result is
// identical for any thread count. Columns with skip[i] set are passed
// through untouched (used for terminal states whose targets are masked).
std::vector<SafeguardedAction> sp_safeguard_batch(const Env& env, const Eigen::MatrixXd& xs,
                                                  const Eigen::MatrixXd& us,
                                                  bool want_jacobian,
                                                  const std::vector<bool>& skip = {});

// Serial reference used by the kernel tests and the benchmark.
std::vector<SafeguardedAction> sp_safeguard_batch_serial(const Env& env,
                                                         const Eigen::MatrixXd& xs,
                                                         const Eigen::MatrixXd& us,
                                                         bool want_jacobian,
                                                         const std::vector<bool>& skip = {});

}  // namespace saferl
