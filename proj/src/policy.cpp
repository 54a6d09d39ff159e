#include "saferl/policy.hpp"

#include <cmath>

#include "saferl/errors.hpp"

namespace saferl {

Eigen::VectorXd DeterministicActor::forward(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd y = mlp_forward(net, x);
  return center.array() + scale.array() * y.array().tanh();
}

Eigen::MatrixXd DeterministicActor::forward_batch(const Eigen::MatrixXd& x,
                                                  MlpBatchCache* cache,
                                                  Eigen::MatrixXd* pre_squash) const {
  Eigen::MatrixXd y = mlp_forward_batch(net, x, cache);
  if (pre_squash) *pre_squash = y;
  Eigen::MatrixXd u = y.array().tanh();
  u.array().colwise() *= scale.array();
  u.colwise() += center;
  return u;
}

void DeterministicActor::backward_batch(const MlpBatchCache& cache,
                                        const Eigen::MatrixXd& pre_squash,
                                        const Eigen::MatrixXd& upstream,
                                        GradAccumulator& grad) const {
  // du/dy = scale .* (1 - tanh(y)^2)
  Eigen::MatrixXd dy = (1.0 - pre_squash.array().tanh().square()) * upstream.array();
  dy.array().colwise() *= scale.array();
  mlp_backward_batch(net, cache, dy, grad);
}

Eigen::VectorXd GaussianPolicy::sample(const Eigen::VectorXd& x, Rng& rng) const {
  Eigen::VectorXd u = mean_forward(x);
  const Eigen::VectorXd sigma = std();
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) += sigma(i) * rng.normal();
  return u;
}

double gaussian_logprob(const GaussianPolicy& pol, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u) {
  const Eigen::VectorXd mu = pol.mean_forward(x);
  if (u.size() != mu.size()) throw DimensionError("gaussian_logprob: action dim mismatch");
  constexpr double log2pi = 1.8378770664093453;  // log(2*pi)
  const Eigen::ArrayXd d = (u - mu).array();
  const Eigen::ArrayXd sigma = pol.std().array();
  return (-0.5 * (d / sigma).square() - pol.log_std.array() - 0.5 * log2pi).sum();
}

GaussianLogprobGrad gaussian_logprob_grad(const GaussianPolicy& pol, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u) {
  const Eigen::VectorXd mu = pol.mean_forward(x);
  if (u.size() != mu.size()) throw DimensionError("gaussian_logprob_grad: action dim mismatch");
  constexpr double log2pi = 1.8378770664093453;
  const Eigen::ArrayXd d = (u - mu).array();
  const Eigen::ArrayXd sigma = pol.std().array();
  const Eigen::ArrayXd inv_var = (sigma * sigma).inverse();

  GaussianLogprobGrad out;
  out.logp = (-0.5 * d.square() * inv_var - pol.log_std.array() - 0.5 * log2pi).sum();
  // d logp / d mu = (u - mu) / sigma^2, chained through the mean net.
  const Eigen::VectorXd dmu = (d * inv_var).matrix();
  out.grad_mean = mlp_backward(pol.mean, x, dmu).first;
  // d logp / d log_std = ((u - mu)/sigma)^2 - 1.
  out.grad_log_std = (d.square() * inv_var - 1.0).matrix();
  return out;
}

}  // namespace saferl
