#include "saferl/mlp.hpp"

#include <cmath>

#include "saferl/errors.hpp"

namespace saferl {

std::vector<Eigen::Index> MlpArch::widths() const {
  std::vector<Eigen::Index> w;
  w.reserve(hidden.size() + 2);
  w.push_back(input);
  for (auto h : hidden) w.push_back(h);
  w.push_back(output);
  return w;
}

Eigen::Index MlpArch::param_count() const {
  const auto w = widths();
  Eigen::Index n = 0;
  for (size_t l = 0; l + 1 < w.size(); ++l) n += w[l + 1] * w[l] + w[l + 1];
  return n;
}

MlpParams::MlpParams(MlpArch arch) : arch_(std::move(arch)) {
  const auto w = arch_.widths();
  for (auto wi : w)
    if (wi <= 0) throw DimensionError("mlp: non-positive layer width");
  Eigen::Index off = 0;
  for (size_t l = 0; l + 1 < w.size(); ++l) {
    w_off_.push_back(off);
    rows_.push_back(w[l + 1]);
    cols_.push_back(w[l]);
    off += w[l + 1] * w[l];
    b_off_.push_back(off);
    off += w[l + 1];
  }
  flat_ = Eigen::VectorXd::Zero(off);
}

MlpParams MlpParams::random_init(MlpArch arch, Rng& rng) {
  MlpParams p(std::move(arch));
  for (Eigen::Index l = 0; l < p.arch_.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(double(p.cols_[l]));
    auto w = p.weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-bound, bound);
    auto b = p.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-bound, bound);
  }
  return p;
}

Eigen::Map<Eigen::MatrixXd> MlpParams::weight(Eigen::Index layer) {
  return {flat_.data() + w_off_[layer], rows_[layer], cols_[layer]};
}
Eigen::Map<const Eigen::MatrixXd> MlpParams::weight(Eigen::Index layer) const {
  return {flat_.data() + w_off_[layer], rows_[layer], cols_[layer]};
}
Eigen::Map<Eigen::VectorXd> MlpParams::bias(Eigen::Index layer) {
  return {flat_.data() + b_off_[layer], rows_[layer]};
}
Eigen::Map<const Eigen::VectorXd> MlpParams::bias(Eigen::Index layer) const {
  return {flat_.data() + b_off_[layer], rows_[layer]};
}

Eigen::Map<Eigen::MatrixXd> MlpParams::map_weight(Eigen::VectorXd& storage,
                                                  Eigen::Index layer) const {
  if (storage.size() != flat_.size()) throw DimensionError("map_weight: storage size mismatch");
  return {storage.data() + w_off_[layer], rows_[layer], cols_[layer]};
}
Eigen::Map<Eigen::VectorXd> MlpParams::map_bias(Eigen::VectorXd& storage,
                                                Eigen::Index layer) const {
  if (storage.size() != flat_.size()) throw DimensionError("map_bias: storage size mismatch");
  return {storage.data() + b_off_[layer], rows_[layer]};
}

Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& x) {
  if (x.size() != p.arch().input) throw DimensionError("mlp_forward: input width mismatch");
  Eigen::VectorXd a = x;
  const Eigen::Index layers = p.arch().num_layers();
  for (Eigen::Index l = 0; l < layers; ++l) {
    Eigen::VectorXd z = p.weight(l) * a + p.bias(l);
    a = (l + 1 < layers) ? z.array().tanh().matrix() : z;
  }
  return a;
}

std::pair<GradAccumulator, Eigen::VectorXd> mlp_backward(const MlpParams& p,
                                                         const Eigen::VectorXd& x,
                                                         const Eigen::VectorXd& upstream) {
  if (x.size() != p.arch().input) throw DimensionError("mlp_backward: input width mismatch");
  if (upstream.size() != p.arch().output)
    throw DimensionError("mlp_backward: upstream width mismatch");
  const Eigen::Index layers = p.arch().num_layers();

  std::vector<Eigen::VectorXd> acts(layers + 1);
  acts[0] = x;
  for (Eigen::Index l = 0; l < layers; ++l) {
    Eigen::VectorXd z = p.weight(l) * acts[l] + p.bias(l);
    acts[l + 1] = (l + 1 < layers) ? z.array().tanh().matrix() : z;
  }

  GradAccumulator grad(p.arch().param_count());
  Eigen::VectorXd delta = upstream;
  for (Eigen::Index l = layers - 1; l >= 0; --l) {
    p.map_weight(grad.flat, l) = delta * acts[l].transpose();
    p.map_bias(grad.flat, l) = delta;
    delta = p.weight(l).transpose() * delta;
    if (l > 0) delta.array() *= 1.0 - acts[l].array().square();
  }
  return {std::move(grad), std::move(delta)};
}

Eigen::MatrixXd mlp_forward_batch(const MlpParams& p, const Eigen::MatrixXd& x,
                                  MlpBatchCache* cache) {
  if (x.rows() != p.arch().input)
    throw DimensionError("mlp_forward_batch: input width mismatch");
  const Eigen::Index layers = p.arch().num_layers();
  if (cache) {
    cache->acts.assign(size_t(layers) + 1, Eigen::MatrixXd());
    cache->acts[0] = x;
  }
  Eigen::MatrixXd a = x;
  for (Eigen::Index l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (p.weight(l) * a).colwise() + p.bias(l);
    a = (l + 1 < layers) ? z.array().tanh().matrix() : z;
    if (cache) cache->acts[size_t(l) + 1] = a;
  }
  return a;
}

void mlp_backward_batch(const MlpParams& p, const MlpBatchCache& cache,
                        const Eigen::MatrixXd& upstream, GradAccumulator& grad,
                        Eigen::MatrixXd* input_grad) {
  const Eigen::Index layers = p.arch().num_layers();
  if (Eigen::Index(cache.acts.size()) != layers + 1)
    throw DimensionError("mlp_backward_batch: cache does not match forward pass");
  if (grad.flat.size() != p.arch().param_count())
    throw DimensionError("mlp_backward_batch: grad accumulator size mismatch");

  Eigen::MatrixXd delta = upstream;
  for (Eigen::Index l = layers - 1; l >= 0; --l) {
    p.map_weight(grad.flat, l) += delta * cache.acts[size_t(l)].transpose();
    p.map_bias(grad.flat, l) += delta.rowwise().sum();
    delta = (p.weight(l).transpose() * delta).eval();
    if (l > 0) delta.array() *= 1.0 - cache.acts[size_t(l)].array().square();
  }
  if (input_grad) *input_grad = delta;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
               double lr) {
  if (params.size() != grad.size() || state.m.size() != params.size())
    throw DimensionError("adam_step: size mismatch");
  if (!grad.allFinite()) throw NumericalError("adam_step: non-finite gradient");
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  state.step += 1;
  state.m = b1 * state.m + (1.0 - b1) * grad;
  state.v = b2 * state.v + (1.0 - b2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(b1, double(state.step));
  const double c2 = 1.0 - std::pow(b2, double(state.step));
  params.array() -=
      lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + eps);
}

void adam_step(MlpParams& params, const GradAccumulator& grad, AdamState& state, double lr) {
  adam_step(params.flat(), grad.flat, state, lr);
}

}  // namespace saferl
