#pragma once

#include <Eigen/Dense>

#include "saferl/mlp.hpp"
#include "saferl/rng.hpp"

namespace saferl {

// Deterministic actor: u = center + scale .* tanh(net(x)). center/scale map
// the squashed output onto the actuation box.
struct DeterministicActor {
  MlpParams net;
  Eigen::VectorXd center;
  Eigen::VectorXd scale;

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x, MlpBatchCache* cache = nullptr,
                                Eigen::MatrixXd* pre_squash = nullptr) const;

  // Gradient of upstream . u w.r.t. net parameters via the squash chain.
  void backward_batch(const MlpBatchCache& cache, const Eigen::MatrixXd& pre_squash,
                      const Eigen::MatrixXd& upstream, GradAccumulator& grad) const;
};

// Diagonal Gaussian with a state-independent learned log-std.
struct GaussianPolicy {
  MlpParams mean;
  Eigen::VectorXd log_std;

  Eigen::VectorXd std() const { return log_std.array().exp(); }
  Eigen::VectorXd mean_forward(const Eigen::VectorXd& x) const { return mlp_forward(mean, x); }
  // Draws one normal per action dimension, in index order.
  Eigen::VectorXd sample(const Eigen::VectorXd& x, Rng& rng) const;
};

struct GaussianLogprobGrad {
  double logp = 0.0;
  GradAccumulator grad_mean;      // w.r.t. mean-net parameters
  Eigen::VectorXd grad_log_std;   // w.r.t. log_std
};

// Log-density of u under the policy at x and its parameter gradient.
GaussianLogprobGrad gaussian_logprob_grad(const GaussianPolicy& pol, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u);

double gaussian_logprob(const GaussianPolicy& pol, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u);

}  // namespace saferl
