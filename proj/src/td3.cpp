#include "saferl/td3.hpp"

#include <cmath>

#include "saferl/constants.hpp"
#include "saferl/errors.hpp"

namespace saferl {

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

namespace {

MlpArch critic_arch(Eigen::Index obs_dim, Eigen::Index act_dim,
                    const std::vector<Eigen::Index>& hidden) {
  MlpArch a;
  a.input = obs_dim + act_dim;
  a.hidden = hidden;
  a.output = 1;
  return a;
}

MlpArch actor_arch(Eigen::Index obs_dim, Eigen::Index act_dim,
                   const std::vector<Eigen::Index>& hidden) {
  MlpArch a;
  a.input = obs_dim;
  a.hidden = hidden;
  a.output = act_dim;
  return a;
}

Eigen::MatrixXd stack_obs_act(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& act) {
  Eigen::MatrixXd in(obs.rows() + act.rows(), obs.cols());
  in.topRows(obs.rows()) = obs;
  in.bottomRows(act.rows()) = act;
  return in;
}

}  // namespace

Td3Trainer::Td3Trainer(const Env& env, Td3Config cfg, std::uint64_t seed)
    : env_(env), cfg_(std::move(cfg)), streams_(seed), replay_(size_t(cfg_.replay_capacity)) {
  validate_combination(cfg_.wiring, cfg_.mitigation);
  lo_ = env_.action_lo();
  hi_ = env_.action_hi();
  half_ = 0.5 * (hi_ - lo_);

  const auto aarch = actor_arch(env_.obs_dim(), env_.action_dim(), cfg_.hidden);
  const auto carch = critic_arch(env_.obs_dim(), env_.action_dim(), cfg_.hidden);
  actor_.net = MlpParams::random_init(aarch, streams_.init);
  actor_.center = 0.5 * (lo_ + hi_);
  actor_.scale = half_;
  q1_ = MlpParams::random_init(carch, streams_.init);
  q2_ = MlpParams::random_init(carch, streams_.init);
  qpen_ = MlpParams::random_init(carch, streams_.init);
  actor_t_ = actor_;
  q1_t_ = q1_;
  q2_t_ = q2_;
  qpen_t_ = qpen_;
  opt_actor_ = AdamState(actor_.net.flat().size());
  opt_q1_ = AdamState(q1_.flat().size());
  opt_q2_ = AdamState(q2_.flat().size());
  opt_qpen_ = AdamState(qpen_.flat().size());

  cur_ = env_.reset(streams_.env.next_u64());
}

Eigen::VectorXd Td3Trainer::clip_action(const Eigen::VectorXd& u) const {
  return u.cwiseMax(lo_).cwiseMin(hi_);
}

void Td3Trainer::polyak(MlpParams& target, const MlpParams& online) const {
  target.flat() += cfg_.tau * (online.flat() - target.flat());
}

Td3Trainer::StepStats Td3Trainer::step() {
  StepStats stats;
  collect(stats);
  if (env_steps_ > cfg_.warmup_steps && replay_.size() >= size_t(cfg_.batch_size))
    update(stats);
  return stats;
}

void Td3Trainer::collect(StepStats& stats) {
  const Eigen::VectorXd obs = env_.obs(cur_);
  Eigen::VectorXd u_raw(env_.action_dim());
  if (env_steps_ < cfg_.warmup_steps) {
    for (Eigen::Index i = 0; i < u_raw.size(); ++i)
      u_raw(i) = streams_.policy.uniform(lo_(i), hi_(i));
  } else {
    u_raw = actor_.forward(obs);
    for (Eigen::Index i = 0; i < u_raw.size(); ++i)
      u_raw(i) += cfg_.expl_noise * half_(i) * streams_.policy.normal();
    u_raw = clip_action(u_raw);
  }

  Transition t;
  t.x = cur_.x;
  t.u = u_raw;

  SafeStepResult ssr;
  switch (cfg_.wiring) {
    case WiringMode::Unsafe: {
      ssr.step = env_.step(cur_, u_raw);
      ssr.step.applied = u_raw;
      t.u_phi = u_raw;
      break;
    }
    case WiringMode::SafeEnv: {
      ssr = se_env_step(env_, cur_, u_raw, cfg_.w, cfg_.mitigation == Mitigation::Penalty);
      break;
    }
    case WiringMode::SafePolicy: {
      SafeguardedAction act = sp_safeguard(env_, cur_, u_raw, true);
      if (!act.empty_safe_set) t.jacobian = act.jac.j;
      ssr = sp_env_step(env_, cur_, u_raw, act, cfg_.w, false);
      break;
    }
  }
  ++env_steps_;

  if (ssr.empty_safe_set) {
    stats.empty_safe_set = true;
    stats.episode_end = true;
    cur_ = env_.reset(streams_.env.next_u64());
    return;
  }

  if (cfg_.wiring != WiringMode::Unsafe) {
    t.u_phi = ssr.step.applied;
    stats.violation = ssr.violation > kEpsFeas;
  }
  t.r = ssr.step.reward;
  t.x_next = ssr.step.next.x;
  t.done = ssr.step.done;
  t.penalty = ssr.step.penalty;

  stats.reward = ssr.step.reward;
  stats.intervention = ssr.step.intervention;
  stats.penalty = ssr.step.penalty;
  stats.episode_end = ssr.step.done;

  const bool done = ssr.step.done;
  EnvState next = ssr.step.next;
  replay_.push(std::move(t));
  cur_ = done ? env_.reset(streams_.env.next_u64()) : next;
}

Eigen::MatrixXd Td3Trainer::draw_target_noise(int batch) {
  Eigen::MatrixXd noise(env_.action_dim(), batch);
  for (int k = 0; k < batch; ++k)
    for (Eigen::Index i = 0; i < noise.rows(); ++i) {
      const double n = cfg_.target_noise * half_(i) * streams_.policy.normal();
      const double cap = cfg_.target_noise_clip * half_(i);
      noise(i, k) = std::clamp(n, -cap, cap);
    }
  return noise;
}

void Td3Trainer::update(StepStats& stats) {
  std::vector<Transition> batch;
  batch.reserve(size_t(cfg_.batch_size));
  for (int k = 0; k < cfg_.batch_size; ++k)
    batch.push_back(replay_[size_t(streams_.policy.below(replay_.size()))]);
  const Eigen::MatrixXd noise = draw_target_noise(cfg_.batch_size);
  update_on_batch(batch, noise, &stats);
}

Td3Trainer::BatchView Td3Trainer::gather(const std::vector<Transition>& batch) const {
  const Eigen::Index b = Eigen::Index(batch.size());
  BatchView v;
  v.obs.resize(env_.obs_dim(), b);
  v.obs_n.resize(env_.obs_dim(), b);
  v.act.resize(env_.action_dim(), b);
  v.u_raw.resize(env_.action_dim(), b);
  v.xs.resize(env_.state_dim(), b);
  v.xs_n.resize(env_.state_dim(), b);
  v.r.resize(b);
  v.h.resize(b);
  v.done.resize(size_t(b));
  EnvState tmp;
  for (Eigen::Index k = 0; k < b; ++k) {
    const Transition& t = batch[size_t(k)];
    tmp.x = t.x;
    v.obs.col(k) = env_.obs(tmp);
    tmp.x = t.x_next;
    v.obs_n.col(k) = env_.obs(tmp);
    v.act.col(k) = cfg_.wiring == WiringMode::SafePolicy ? t.u_phi : t.u;
    v.u_raw.col(k) = t.u;
    v.xs.col(k) = t.x;
    v.xs_n.col(k) = t.x_next;
    v.r(k) = t.r;
    v.h(k) = t.penalty;
    v.done[size_t(k)] = t.done;
  }
  return v;
}

Eigen::VectorXd Td3Trainer::targets_internal(const BatchView& v,
                                             const Eigen::MatrixXd& noise) const {
  const Eigen::Index b = v.r.size();
  Eigen::MatrixXd a_next = actor_t_.forward_batch(v.obs_n);
  a_next += noise;
  a_next = a_next.cwiseMax(lo_.replicate(1, b)).cwiseMin(hi_.replicate(1, b));

  if (cfg_.wiring == WiringMode::SafePolicy) {
    const auto acts = sp_safeguard_batch(env_, v.xs_n, a_next, false, v.done);
    for (Eigen::Index k = 0; k < b; ++k) {
      if (v.done[size_t(k)]) continue;
      if (acts[size_t(k)].empty_safe_set)
        throw NumericalError("td3 targets: replayed next state lost its safe set");
      a_next.col(k) = acts[size_t(k)].u_phi;
    }
  }

  const Eigen::MatrixXd qin = stack_obs_act(v.obs_n, a_next);
  const Eigen::RowVectorXd q1v = mlp_forward_batch(q1_t_, qin);
  const Eigen::RowVectorXd q2v = mlp_forward_batch(q2_t_, qin);
  Eigen::VectorXd y(b);
  for (Eigen::Index k = 0; k < b; ++k) {
    const double not_done = v.done[size_t(k)] ? 0.0 : 1.0;
    y(k) = v.r(k) + cfg_.gamma * not_done * std::min(q1v(k), q2v(k));
  }
  return y;
}

Eigen::VectorXd Td3Trainer::penalty_targets(const BatchView& v,
                                            const Eigen::MatrixXd& noise) const {
  // Penalty critic conditions on the unsafe policy: target actions stay
  // unprojected (same smoothing draw as the reward critics).
  const Eigen::Index b = v.r.size();
  Eigen::MatrixXd a_next = actor_t_.forward_batch(v.obs_n);
  a_next += noise;
  a_next = a_next.cwiseMax(lo_.replicate(1, b)).cwiseMin(hi_.replicate(1, b));
  const Eigen::RowVectorXd qp = mlp_forward_batch(qpen_t_, stack_obs_act(v.obs_n, a_next));
  Eigen::VectorXd y(b);
  for (Eigen::Index k = 0; k < b; ++k) {
    const double not_done = v.done[size_t(k)] ? 0.0 : 1.0;
    y(k) = v.h(k) + cfg_.gamma * not_done * qp(k);
  }
  return y;
}

Eigen::VectorXd Td3Trainer::critic_targets(const std::vector<Transition>& batch,
                                           const Eigen::MatrixXd& noise) const {
  return targets_internal(gather(batch), noise);
}

Eigen::MatrixXd Td3Trainer::actor_upstream(const BatchView& v, Eigen::MatrixXd& u_a,
                                           MlpBatchCache& cache, Eigen::MatrixXd& pre_squash) {
  const Eigen::Index b = v.obs.cols();
  const double inv_b = 1.0 / double(b);
  u_a = actor_.forward_batch(v.obs, &cache, &pre_squash);

  Eigen::MatrixXd upstream(env_.action_dim(), b);
  if (cfg_.wiring == WiringMode::SafePolicy) {
    const auto acts = sp_safeguard_batch(env_, v.xs, u_a, true);
    Eigen::MatrixXd u_phi(env_.action_dim(), b);
    for (Eigen::Index k = 0; k < b; ++k) {
      if (acts[size_t(k)].empty_safe_set)
        throw NumericalError("td3 actor: replayed state lost its safe set");
      u_phi.col(k) = acts[size_t(k)].u_phi;
    }
    MlpBatchCache qcache;
    mlp_forward_batch(q1_, stack_obs_act(v.obs, u_phi), &qcache);
    GradAccumulator sink(q1_.flat().size());
    Eigen::MatrixXd dqin;
    mlp_backward_batch(q1_, qcache, Eigen::MatrixXd::Constant(1, b, -inv_b), sink, &dqin);
    const Eigen::MatrixXd dq = dqin.bottomRows(env_.action_dim());

    Eigen::MatrixXd dpen;
    if (cfg_.mitigation == Mitigation::PenC) {
      MlpBatchCache pcache;
      mlp_forward_batch(qpen_, stack_obs_act(v.obs, u_a), &pcache);
      GradAccumulator psink(qpen_.flat().size());
      Eigen::MatrixXd dpin;
      mlp_backward_batch(qpen_, pcache, Eigen::MatrixXd::Constant(1, b, inv_b), psink, &dpin);
      dpen = dpin.bottomRows(env_.action_dim());
    }

    for (Eigen::Index k = 0; k < b; ++k) {
      const Eigen::MatrixXd& j = acts[size_t(k)].jac.j;
      upstream.col(k) = j.transpose() * dq.col(k);
      if (cfg_.mitigation == Mitigation::Psl) {
        const Eigen::VectorXd resid = u_a.col(k) - u_phi.col(k);
        upstream.col(k) += (2.0 * cfg_.w * inv_b) * (resid - j.transpose() * resid);
      }
      if (cfg_.mitigation == Mitigation::PenC) upstream.col(k) += dpen.col(k);
    }
  } else {
    MlpBatchCache qcache;
    mlp_forward_batch(q1_, stack_obs_act(v.obs, u_a), &qcache);
    GradAccumulator sink(q1_.flat().size());
    Eigen::MatrixXd dqin;
    mlp_backward_batch(q1_, qcache, Eigen::MatrixXd::Constant(1, b, -inv_b), sink, &dqin);
    upstream = dqin.bottomRows(env_.action_dim());
  }
  return upstream;
}

Eigen::MatrixXd Td3Trainer::actor_action_upstream(const std::vector<Transition>& batch) {
  BatchView v = gather(batch);
  Eigen::MatrixXd u_a, pre_squash;
  MlpBatchCache cache;
  return actor_upstream(v, u_a, cache, pre_squash);
}

Eigen::VectorXd Td3Trainer::actor_gradient(const std::vector<Transition>& batch) {
  BatchView v = gather(batch);
  Eigen::MatrixXd u_a, pre_squash;
  MlpBatchCache cache;
  const Eigen::MatrixXd upstream = actor_upstream(v, u_a, cache, pre_squash);
  GradAccumulator grad(actor_.net.flat().size());
  actor_.backward_batch(cache, pre_squash, upstream, grad);
  return grad.flat;
}

void Td3Trainer::update_on_batch(const std::vector<Transition>& batch,
                                 const Eigen::MatrixXd& noise, StepStats* stats) {
  const BatchView v = gather(batch);
  const Eigen::Index b = v.r.size();
  const double inv_b = 1.0 / double(b);

  const Eigen::VectorXd y = targets_internal(v, noise);
  const Eigen::MatrixXd qin = stack_obs_act(v.obs, v.act);

  double critic_loss = 0.0;
  // Twin critics are independent given the targets; train them in parallel.
  MlpParams* critics[2] = {&q1_, &q2_};
  AdamState* opts[2] = {&opt_q1_, &opt_q2_};
  double losses[2] = {0.0, 0.0};
#pragma omp parallel for num_threads(2) schedule(static)
  for (int c = 0; c < 2; ++c) {
    MlpBatchCache cache;
    const Eigen::RowVectorXd q = mlp_forward_batch(*critics[c], qin, &cache);
    Eigen::RowVectorXd err = q - y.transpose();
    losses[c] = err.squaredNorm() * inv_b;
    GradAccumulator grad(critics[c]->flat().size());
    mlp_backward_batch(*critics[c], cache, (2.0 * inv_b) * err, grad);
    adam_step(*critics[c], grad, *opts[c], cfg_.critic_lr);
  }
  critic_loss = 0.5 * (losses[0] + losses[1]);
  if (!std::isfinite(critic_loss)) throw NumericalError("td3: non-finite critic loss");

  if (cfg_.mitigation == Mitigation::PenC) {
    const Eigen::VectorXd yp = penalty_targets(v, noise);
    MlpBatchCache cache;
    const Eigen::RowVectorXd qp =
        mlp_forward_batch(qpen_, stack_obs_act(v.obs, v.u_raw), &cache);
    GradAccumulator grad(qpen_.flat().size());
    mlp_backward_batch(qpen_, cache, (2.0 * inv_b) * (qp - yp.transpose()), grad);
    adam_step(qpen_, grad, opt_qpen_, cfg_.critic_lr);
  }

  double actor_loss = 0.0;
  ++updates_;
  if (updates_ % cfg_.policy_delay == 0) {
    BatchView va = v;
    Eigen::MatrixXd u_a, pre_squash;
    MlpBatchCache cache;
    const Eigen::MatrixXd upstream = actor_upstream(va, u_a, cache, pre_squash);
    GradAccumulator grad(actor_.net.flat().size());
    actor_.backward_batch(cache, pre_squash, upstream, grad);
    adam_step(actor_.net, grad, opt_actor_, cfg_.actor_lr);
    if (!grad.flat.allFinite()) throw NumericalError("td3: non-finite actor gradient");
    actor_loss = -mlp_forward_batch(q1_, stack_obs_act(va.obs, u_a)).mean();

    polyak(actor_t_.net, actor_.net);
    polyak(q1_t_, q1_);
    polyak(q2_t_, q2_);
    if (cfg_.mitigation == Mitigation::PenC) polyak(qpen_t_, qpen_);
  }

  if (stats) {
    stats->updated = true;
    stats->critic_loss = critic_loss;
    stats->actor_loss = actor_loss;
  }
}

}  // namespace saferl
