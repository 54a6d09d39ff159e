#include "saferl/a2c.hpp"

#include <cmath>

#include "saferl/constants.hpp"
#include "saferl/errors.hpp"

namespace saferl {

A2cTrainer::A2cTrainer(const Env& env, A2cConfig cfg, std::uint64_t seed)
    : env_(env), cfg_(std::move(cfg)), streams_(seed) {
  validate_combination(cfg_.wiring, cfg_.mitigation);
  lo_ = env_.action_lo();
  hi_ = env_.action_hi();

  MlpArch mean_arch{env_.obs_dim(), cfg_.hidden, env_.action_dim()};
  MlpArch value_arch{env_.obs_dim(), cfg_.hidden, 1};
  policy_.mean = MlpParams::random_init(mean_arch, streams_.init);
  policy_.log_std = Eigen::VectorXd::Constant(env_.action_dim(), cfg_.init_log_std);
  value_ = MlpParams::random_init(value_arch, streams_.init);
  opt_mean_ = AdamState(policy_.mean.flat().size());
  opt_log_std_ = AdamState(policy_.log_std.size());
  opt_value_ = AdamState(value_.flat().size());

  cur_ = env_.reset(streams_.env.next_u64());
}

Eigen::VectorXd A2cTrainer::policy_flat() const {
  Eigen::VectorXd out(policy_.mean.flat().size() + policy_.log_std.size());
  out << policy_.mean.flat(), policy_.log_std;
  return out;
}

void A2cTrainer::collect(UpdateStats& stats, std::vector<Transition>& rollout) {
  const bool subtract =
      (cfg_.wiring == WiringMode::SafeEnv && cfg_.mitigation == Mitigation::Penalty) ||
      (cfg_.wiring == WiringMode::SafePolicy && cfg_.mitigation == Mitigation::PenC);

  for (int t = 0; t < cfg_.n_steps; ++t) {
    const Eigen::VectorXd obs = env_.obs(cur_);
    const Eigen::VectorXd u = policy_.sample(obs, streams_.policy);

    Transition tr;
    tr.x = cur_.x;
    tr.u = u;

    SafeStepResult ssr;
    switch (cfg_.wiring) {
      case WiringMode::Unsafe: {
        const Eigen::VectorXd applied = u.cwiseMax(lo_).cwiseMin(hi_);
        ssr.step = env_.step(cur_, applied);
        ssr.step.applied = applied;
        break;
      }
      case WiringMode::SafeEnv:
        ssr = se_env_step(env_, cur_, u, cfg_.w, subtract);
        break;
      case WiringMode::SafePolicy: {
        const SafeguardedAction act = sp_safeguard(env_, cur_, u, false);
        ssr = sp_env_step(env_, cur_, u, act, cfg_.w, subtract);
        break;
      }
    }
    ++env_steps_;

    if (ssr.empty_safe_set) {
      // Distinguished terminal outcome: the episode ends without a step.
      ++stats.empty_safe_sets;
      ++stats.episode_ends;
      if (!rollout.empty()) rollout.back().done = true;
      cur_ = env_.reset(streams_.env.next_u64());
      continue;
    }

    tr.u_phi = ssr.step.applied;
    tr.r = ssr.step.reward;
    tr.x_next = ssr.step.next.x;
    tr.done = ssr.step.done;
    tr.penalty = ssr.step.penalty;
    rollout.push_back(std::move(tr));

    stats.reward_sum += ssr.step.reward;
    ++stats.steps;
    if (ssr.step.intervention) ++stats.interventions;
    stats.penalty_sum += ssr.step.penalty;
    if (cfg_.wiring != WiringMode::Unsafe && ssr.violation > kEpsFeas) ++stats.violations;

    if (ssr.step.done) {
      ++stats.episode_ends;
      cur_ = env_.reset(streams_.env.next_u64());
    } else {
      cur_ = ssr.step.next;
    }
  }
}

A2cTrainer::UpdateStats A2cTrainer::update() {
  UpdateStats stats;
  std::vector<Transition> rollout;
  rollout.reserve(size_t(cfg_.n_steps));
  collect(stats, rollout);
  const Eigen::Index n = Eigen::Index(rollout.size());
  if (n == 0) return stats;
  const double inv_n = 1.0 / double(n);

  Eigen::MatrixXd obs(env_.obs_dim(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    EnvState tmp;
    tmp.x = rollout[size_t(k)].x;
    obs.col(k) = env_.obs(tmp);
  }

  MlpBatchCache vcache;
  const Eigen::RowVectorXd v_now = mlp_forward_batch(value_, obs, &vcache);
  const double v_boot = mlp_forward(value_, env_.obs(cur_))(0);

  Eigen::VectorXd rewards(n), values(n + 1);
  Eigen::Array<bool, Eigen::Dynamic, 1> dones(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    rewards(k) = rollout[size_t(k)].r;
    values(k) = v_now(k);
    dones(k) = rollout[size_t(k)].done;
  }
  values(n) = v_boot;
  const Eigen::VectorXd adv = gae(rewards, values, dones, cfg_.gamma, cfg_.lambda);
  const Eigen::VectorXd v_target = adv + values.head(n);

  // Value regression.
  Eigen::RowVectorXd verr = v_now - v_target.transpose();
  GradAccumulator vgrad(value_.flat().size());
  mlp_backward_batch(value_, vcache, (cfg_.value_coef * 2.0 * inv_n) * verr, vgrad);
  stats.value_loss = cfg_.value_coef * verr.squaredNorm() * inv_n;

  // Policy gradient on the pre-projection actions in every wiring.
  GradAccumulator mgrad(policy_.mean.flat().size());
  Eigen::VectorXd sgrad = Eigen::VectorXd::Zero(policy_.log_std.size());
  double pg_loss = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const GaussianLogprobGrad g =
        gaussian_logprob_grad(policy_, obs.col(k), rollout[size_t(k)].u);
    const double scale = -adv(k) * inv_n;
    mgrad.flat += scale * g.grad_mean.flat;
    sgrad += scale * g.grad_log_std;
    pg_loss += scale * g.logp;
  }
  stats.actor_loss = pg_loss;

  // Per-sample squared-distance loss on the mean and its projection.
  if (cfg_.wiring == WiringMode::SafePolicy && cfg_.mitigation == Mitigation::Psl) {
    for (Eigen::Index k = 0; k < n; ++k) {
      EnvState tmp;
      tmp.x = rollout[size_t(k)].x;
      const Eigen::VectorXd mu = policy_.mean_forward(obs.col(k));
      const SafeguardedAction act = sp_safeguard(env_, tmp, mu, true);
      if (act.empty_safe_set) continue;
      const Eigen::VectorXd resid = mu - act.u_phi;
      const Eigen::VectorXd up =
          (2.0 * cfg_.w * inv_n) * (resid - act.jac.j.transpose() * resid);
      mgrad.flat += mlp_backward(policy_.mean, obs.col(k), up).first.flat;
      stats.actor_loss += cfg_.w * inv_n * resid.squaredNorm();
    }
  }

  if (!mgrad.flat.allFinite() || !vgrad.flat.allFinite())
    throw NumericalError("a2c: non-finite gradients");

  adam_step(policy_.mean, mgrad, opt_mean_, cfg_.actor_lr);
  adam_step(policy_.log_std, sgrad, opt_log_std_, cfg_.actor_lr);
  adam_step(value_, vgrad, opt_value_, cfg_.value_lr);
  return stats;
}

}  // namespace saferl
