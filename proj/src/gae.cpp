#include "saferl/gae.hpp"

#include "saferl/errors.hpp"

namespace saferl {

Eigen::VectorXd gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                    const Eigen::Array<bool, Eigen::Dynamic, 1>& dones, double gamma,
                    double lambda) {
  const Eigen::Index t = rewards.size();
  if (values.size() != t + 1 || dones.size() != t)
    throw DimensionError("gae: rewards/values/dones length mismatch");

  Eigen::VectorXd adv(t);
  double carry = 0.0;
  for (Eigen::Index k = t - 1; k >= 0; --k) {
    const double not_done = dones(k) ? 0.0 : 1.0;
    const double delta = rewards(k) + gamma * not_done * values(k + 1) - values(k);
    carry = delta + gamma * lambda * not_done * carry;
    adv(k) = carry;
  }
  return adv;
}

}  // namespace saferl
