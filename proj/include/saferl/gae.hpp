#pragma once

#include <Eigen/Dense>

namespace saferl {

// Generalized advantage estimation over a finite rollout via the backward
// recursion a_t = delta_t + gamma*lambda*(1-done_t)*a_{t+1}, with
// delta_t = r_t + gamma*(1-done_t)*values[t+1] - values[t].
// values has length T+1; its last entry is the terminal bootstrap.
Eigen::VectorXd gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                    const Eigen::Array<bool, Eigen::Dynamic, 1>& dones, double gamma,
                    double lambda);

}  // namespace saferl
