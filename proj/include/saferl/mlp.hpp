#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "saferl/rng.hpp"

namespace saferl {

// Fixed architecture: tanh hidden layers, linear output.
struct MlpArch {
  Eigen::Index input = 0;
  std::vector<Eigen::Index> hidden;
  Eigen::Index output = 0;

  std::vector<Eigen::Index> widths() const;
  Eigen::Index num_layers() const { return Eigen::Index(hidden.size()) + 1; }
  Eigen::Index param_count() const;
  bool operator==(const MlpArch& o) const {
    return input == o.input && output == o.output && hidden == o.hidden;
  }
};

// Parameters live in one flat vector; weight/bias accessors are Eigen maps
// into it, so the flat view and the structured view are the same storage and
// round-trip losslessly by construction.
class MlpParams {
 public:
  MlpParams() = default;
  explicit MlpParams(MlpArch arch);  // zero-initialized

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) on weights and biases, drawn in
  // a fixed layer-by-layer, column-major order.
  static MlpParams random_init(MlpArch arch, Rng& rng);

  const MlpArch& arch() const { return arch_; }
  Eigen::VectorXd& flat() { return flat_; }
  const Eigen::VectorXd& flat() const { return flat_; }

  Eigen::Map<Eigen::MatrixXd> weight(Eigen::Index layer);
  Eigen::Map<const Eigen::MatrixXd> weight(Eigen::Index layer) const;
  Eigen::Map<Eigen::VectorXd> bias(Eigen::Index layer);
  Eigen::Map<const Eigen::VectorXd> bias(Eigen::Index layer) const;

  // Views with this parameter layout into external flat storage (gradients).
  Eigen::Map<Eigen::MatrixXd> map_weight(Eigen::VectorXd& storage, Eigen::Index layer) const;
  Eigen::Map<Eigen::VectorXd> map_bias(Eigen::VectorXd& storage, Eigen::Index layer) const;

 private:
  MlpArch arch_;
  Eigen::VectorXd flat_;
  std::vector<Eigen::Index> w_off_, b_off_;
  std::vector<Eigen::Index> rows_, cols_;
};

struct GradAccumulator {
  Eigen::VectorXd flat;

  GradAccumulator() = default;
  explicit GradAccumulator(Eigen::Index n) : flat(Eigen::VectorXd::Zero(n)) {}
  void zero() { flat.setZero(); }
};

// Serial reference path, one sample at a time.
Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& x);
// Gradients of upstream . output w.r.t. parameters and input.
std::pair<GradAccumulator, Eigen::VectorXd> mlp_backward(const MlpParams& p,
                                                         const Eigen::VectorXd& x,
                                                         const Eigen::VectorXd& upstream);

// Batched kernels, one column per sample. Arithmetic is independent of
// thread count (Eigen products, no parallel reductions), so results are
// bit-reproducible for a fixed binary.
struct MlpBatchCache {
  std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, acts[l+1] = layer output
};

Eigen::MatrixXd mlp_forward_batch(const MlpParams& p, const Eigen::MatrixXd& x,
                                  MlpBatchCache* cache = nullptr);

// Accumulates the batch-summed parameter gradient into grad (which must be
// sized to param_count); optionally returns per-sample input gradients.
void mlp_backward_batch(const MlpParams& p, const MlpBatchCache& cache,
                        const Eigen::MatrixXd& upstream, GradAccumulator& grad,
                        Eigen::MatrixXd* input_grad = nullptr);

// Adam with (beta1, beta2, eps) = (0.9, 0.999, 1e-8) and bias correction.
// Throws NumericalError on non-finite gradients.
struct AdamState {
  Eigen::VectorXd m, v;
  long step = 0;

  AdamState() = default;
  explicit AdamState(Eigen::Index n)
      : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
               double lr);
void adam_step(MlpParams& params, const GradAccumulator& grad, AdamState& state, double lr);

}  // namespace saferl
