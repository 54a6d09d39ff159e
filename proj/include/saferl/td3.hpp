#pragma once

#include <cstdint>
#include <vector>

#include "saferl/batch_kernels.hpp"
#include "saferl/eval.hpp"
#include "saferl/policy.hpp"
#include "saferl/wiring.hpp"

namespace saferl {

struct Td3Config {
  double gamma = 0.99;
  double tau = 0.005;
  int policy_delay = 2;
  // Noise scales are multiples of the per-dimension action half-range.
  double expl_noise = 0.1;
  double target_noise = 0.2;
  double target_noise_clip = 0.5;
  int batch_size = 256;
  int replay_capacity = 100000;
  int warmup_steps = 1000;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  std::vector<Eigen::Index> hidden = {64, 64};
  WiringMode wiring = WiringMode::Unsafe;
  Mitigation mitigation = Mitigation::None;
  double w = 0.1;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity) : capacity_(capacity) { data_.reserve(capacity); }
  void push(Transition t);
  size_t size() const { return data_.size(); }
  const Transition& operator[](size_t i) const { return data_[i]; }

 private:
  size_t capacity_;
  size_t next_ = 0;
  std::vector<Transition> data_;
};

// Twin-delayed deterministic policy gradient in the three wirings. In
// SafeEnv mode the critics condition on the pre-projection action and no
// safeguard Jacobian appears anywhere; in SafePolicy mode critics condition
// on the projected action, targets project the smoothed target action, and
// the actor gradient flows through the safeguard Jacobian.
class Td3Trainer {
 public:
  Td3Trainer(const Env& env, Td3Config cfg, std::uint64_t seed);

  struct StepStats {
    double reward = 0.0;
    bool episode_end = false;
    bool intervention = false;
    double penalty = 0.0;
    bool empty_safe_set = false;
    bool violation = false;
    bool updated = false;
    double actor_loss = 0.0;
    double critic_loss = 0.0;
  };

  // One environment interaction plus one gradient update after warmup.
  StepStats step();

  long env_steps() const { return env_steps_; }
  const Td3Config& config() const { return cfg_; }
  const DeterministicActor& actor() const { return actor_; }
  const MlpParams& q1() const { return q1_; }
  const MlpParams& q2() const { return q2_; }
  MlpParams& q1_mut() { return q1_; }
  const MlpParams& penalty_critic() const { return qpen_; }
  ReplayBuffer& replay() { return replay_; }

  // Critic regression targets for an explicit batch and smoothing noise
  // (one column per sample); pure in the trainer state. Exposed for the
  // action-aliasing equality tests.
  Eigen::VectorXd critic_targets(const std::vector<Transition>& batch,
                                 const Eigen::MatrixXd& noise) const;

  // Action-space gradient (d loss / d action, one column per sample) of the
  // actor objective, before backpropagation into the policy parameters.
  Eigen::MatrixXd actor_action_upstream(const std::vector<Transition>& batch);

  // Flat parameter gradient of the actor objective on a batch.
  Eigen::VectorXd actor_gradient(const std::vector<Transition>& batch);

  // One gradient update on an explicit batch with explicit noise (test
  // hook); the training loop samples its own batches and noise.
  void update_on_batch(const std::vector<Transition>& batch, const Eigen::MatrixXd& noise,
                       StepStats* stats = nullptr);

 private:
  struct BatchView {
    Eigen::MatrixXd obs, obs_n, act, xs, xs_n, u_raw;
    Eigen::VectorXd r, h;
    std::vector<bool> done;
  };
  BatchView gather(const std::vector<Transition>& batch) const;
  Eigen::VectorXd targets_internal(const BatchView& v, const Eigen::MatrixXd& noise) const;
  Eigen::VectorXd penalty_targets(const BatchView& v, const Eigen::MatrixXd& noise) const;
  Eigen::MatrixXd actor_upstream(const BatchView& v, Eigen::MatrixXd& u_a,
                                 MlpBatchCache& cache, Eigen::MatrixXd& pre_squash);
  void collect(StepStats& stats);
  void update(StepStats& stats);
  Eigen::MatrixXd draw_target_noise(int batch);
  Eigen::VectorXd clip_action(const Eigen::VectorXd& u) const;
  void polyak(MlpParams& target, const MlpParams& online) const;

  const Env& env_;
  Td3Config cfg_;
  RunStreams streams_;
  Eigen::VectorXd lo_, hi_, half_;

  DeterministicActor actor_, actor_t_;
  MlpParams q1_, q2_, q1_t_, q2_t_, qpen_, qpen_t_;
  AdamState opt_actor_, opt_q1_, opt_q2_, opt_qpen_;

  ReplayBuffer replay_;
  EnvState cur_;
  long env_steps_ = 0;
  long updates_ = 0;
};

}  // namespace saferl
