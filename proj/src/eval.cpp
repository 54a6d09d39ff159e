#include "saferl/eval.hpp"

#include <functional>

#include "saferl/constants.hpp"

namespace saferl {

namespace {

using ActionFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

EvalResult run_episodes(const Env& env, const ActionFn& act, WiringMode wiring,
                        const std::vector<std::uint64_t>& seeds) {
  const Eigen::Index n = Eigen::Index(seeds.size());
  EvalResult out;
  out.returns.resize(n);
  out.interventions.resize(n);
  std::vector<long> violations(size_t(n), 0);
  std::vector<long> empties(size_t(n), 0);
  const Eigen::VectorXd lo = env.action_lo(), hi = env.action_hi();

#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index e = 0; e < n; ++e) {
    EnvState s = env.reset(seeds[size_t(e)]);
    double ret = 0.0;
    double interventions = 0.0;
    for (int t = 0; t < env.horizon(); ++t) {
      const Eigen::VectorXd u = act(env.obs(s)).cwiseMax(lo).cwiseMin(hi);
      if (wiring == WiringMode::Unsafe) {
        StepResult sr = env.step(s, u);
        ret += sr.reward;
        s = sr.next;
        if (sr.done) break;
      } else {
        // SE and SP evaluation are arithmetically identical: project, step.
        SafeStepResult ssr = se_env_step(env, s, u, 0.0, false);
        if (ssr.empty_safe_set) {
          ++empties[size_t(e)];
          break;
        }
        ret += ssr.step.reward;
        if (ssr.step.intervention) interventions += 1.0;
        if (ssr.violation > kEpsFeas) ++violations[size_t(e)];
        s = ssr.step.next;
        if (ssr.step.done) break;
      }
    }
    out.returns(e) = ret;
    out.interventions(e) = interventions;
  }
  for (auto v : violations) out.violations += v;
  for (auto c : empties) out.empty_safe_sets += c;
  return out;
}

}  // namespace

EvalResult evaluate_actor(const Env& env, const DeterministicActor& actor, WiringMode wiring,
                          const std::vector<std::uint64_t>& episode_seeds) {
  return run_episodes(
      env, [&](const Eigen::VectorXd& obs) { return actor.forward(obs); }, wiring,
      episode_seeds);
}

EvalResult evaluate_gaussian(const Env& env, const GaussianPolicy& policy, WiringMode wiring,
                             const std::vector<std::uint64_t>& episode_seeds) {
  return run_episodes(
      env, [&](const Eigen::VectorXd& obs) { return policy.mean_forward(obs); }, wiring,
      episode_seeds);
}

}  // namespace saferl
