#include "saferl/experiment.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "saferl/checkpoint.hpp"
#include "saferl/errors.hpp"
#include "saferl/stats.hpp"

namespace saferl {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["env"] = c.env_id;
  j["algorithm"] = c.algorithm;
  j["wiring"] = to_string(c.wiring);
  j["mitigation"] = to_string(c.mitigation);
  j["w"] = c.w;
  j["train_steps"] = c.train_steps;
  j["eval_interval"] = c.eval_interval;
  j["train_seeds"] = c.train_seeds;
  j["eval_seeds"] = c.eval_seeds;
  j["out_dir"] = c.out_dir;
  j["data_dir"] = c.data_dir;
  if (c.algorithm == "td3") {
    j["td3"] = {{"gamma", c.td3.gamma},
                {"tau", c.td3.tau},
                {"policy_delay", c.td3.policy_delay},
                {"expl_noise", c.td3.expl_noise},
                {"target_noise", c.td3.target_noise},
                {"target_noise_clip", c.td3.target_noise_clip},
                {"batch_size", c.td3.batch_size},
                {"replay_capacity", c.td3.replay_capacity},
                {"warmup_steps", c.td3.warmup_steps},
                {"actor_lr", c.td3.actor_lr},
                {"critic_lr", c.td3.critic_lr}};
  } else {
    j["a2c"] = {{"gamma", c.a2c.gamma},
                {"lambda", c.a2c.lambda},
                {"n_steps", c.a2c.n_steps},
                {"actor_lr", c.a2c.actor_lr},
                {"value_lr", c.a2c.value_lr},
                {"value_coef", c.a2c.value_coef},
                {"init_log_std", c.a2c.init_log_std}};
  }
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct SeedResult {
  Eigen::VectorXd returns;
  Eigen::VectorXd interventions;
  long violations = 0;
  long empty_safe_sets = 0;
};

struct MetricsRow {
  long env_step;
  double eval_return_mean;
  double interventions;
  double penalty_sum;
  double actor_loss;
  double critic_loss;
};

void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write metrics: " + path);
  f << "env_step,eval_return_mean,interventions,penalty_sum,actor_loss,critic_loss\n";
  for (const auto& r : rows) {
    f << r.env_step << "," << fmt17(r.eval_return_mean) << "," << fmt17(r.interventions)
      << "," << fmt17(r.penalty_sum) << "," << fmt17(r.actor_loss) << ","
      << fmt17(r.critic_loss) << "\n";
  }
}

SeedResult train_one_seed(const ExperimentConfig& cfg, const Env& env, std::uint64_t seed,
                          const std::string& seed_dir) {
  fs::create_directories(seed_dir);
  std::vector<MetricsRow> rows;
  SeedResult out;
  double penalty_sum = 0.0;
  double actor_loss = 0.0, critic_loss = 0.0;

  const auto eval_now = [&](const DeterministicActor* actor, const GaussianPolicy* pol,
                            long step) {
    const EvalResult ev = actor ? evaluate_actor(env, *actor, cfg.wiring, cfg.eval_seeds)
                                : evaluate_gaussian(env, *pol, cfg.wiring, cfg.eval_seeds);
    out.violations += ev.violations;
    out.empty_safe_sets += ev.empty_safe_sets;
    rows.push_back({step, ev.returns.mean(), ev.interventions.mean(), penalty_sum,
                    actor_loss, critic_loss});
    return ev;
  };

  EvalResult final_eval;
  if (cfg.algorithm == "td3") {
    Td3Config tc = cfg.td3;
    tc.wiring = cfg.wiring;
    tc.mitigation = cfg.mitigation;
    tc.w = cfg.w;
    Td3Trainer trainer(env, tc, seed);
    for (long s = 1; s <= cfg.train_steps; ++s) {
      const auto st = trainer.step();
      penalty_sum += st.penalty;
      if (st.violation) ++out.violations;
      if (st.empty_safe_set) ++out.empty_safe_sets;
      if (st.updated) {
        critic_loss = st.critic_loss;
        if (st.actor_loss != 0.0) actor_loss = st.actor_loss;
      }
      if (s % cfg.eval_interval == 0 || s == cfg.train_steps)
        final_eval = eval_now(&trainer.actor(), nullptr, s);
    }
    save_checkpoint(seed_dir + "/final.ckpt",
                    {mlp_section("actor", trainer.actor().net),
                     vector_section("actor_center", trainer.actor().center),
                     vector_section("actor_scale", trainer.actor().scale),
                     mlp_section("q1", trainer.q1()), mlp_section("q2", trainer.q2())});
  } else {
    A2cConfig ac = cfg.a2c;
    ac.wiring = cfg.wiring;
    ac.mitigation = cfg.mitigation;
    ac.w = cfg.w;
    A2cTrainer trainer(env, ac, seed);
    long next_eval = cfg.eval_interval;
    while (trainer.env_steps() < cfg.train_steps) {
      const auto st = trainer.update();
      penalty_sum += st.penalty_sum;
      out.violations += st.violations;
      out.empty_safe_sets += st.empty_safe_sets;
      actor_loss = st.actor_loss;
      critic_loss = st.value_loss;
      if (trainer.env_steps() >= next_eval || trainer.env_steps() >= cfg.train_steps) {
        final_eval = eval_now(nullptr, &trainer.policy(), trainer.env_steps());
        next_eval += cfg.eval_interval;
      }
    }
    save_checkpoint(seed_dir + "/final.ckpt",
                    {mlp_section("policy_mean", trainer.policy().mean),
                     vector_section("log_std", trainer.policy().log_std),
                     mlp_section("value", trainer.value())});
  }

  write_metrics(seed_dir + "/metrics.csv", rows);
  out.returns = final_eval.returns;
  out.interventions = final_eval.interventions;
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (algorithm != "td3" && algorithm != "a2c")
    throw ConfigError("algorithm must be td3 or a2c");
  validate_combination(wiring, mitigation);
  if (train_steps <= 0 || eval_interval <= 0) throw ConfigError("non-positive step counts");
  if (train_seeds.empty() || eval_seeds.empty()) throw ConfigError("empty seed lists");
  std::set<std::uint64_t> uniq(train_seeds.begin(), train_seeds.end());
  if (uniq.size() != train_seeds.size()) throw ConfigError("duplicate train seeds");
  std::set<std::uint64_t> uniq_eval(eval_seeds.begin(), eval_seeds.end());
  if (uniq_eval.size() != eval_seeds.size()) throw ConfigError("duplicate eval seeds");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open experiment config: " + path);
  json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw ConfigError("bad json in " + path + ": " + e.what());
  }
  ExperimentConfig c;
  if (j.contains("env")) c.env_id = j["env"].get<std::string>();
  if (j.contains("algorithm")) c.algorithm = j["algorithm"].get<std::string>();
  if (j.contains("wiring")) c.wiring = wiring_from_string(j["wiring"].get<std::string>());
  if (j.contains("mitigation"))
    c.mitigation = mitigation_from_string(j["mitigation"].get<std::string>());
  if (j.contains("w")) c.w = j["w"].get<double>();
  if (j.contains("train_steps")) c.train_steps = j["train_steps"].get<long>();
  if (j.contains("eval_interval")) c.eval_interval = j["eval_interval"].get<long>();
  if (j.contains("train_seeds"))
    c.train_seeds = j["train_seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("eval_seeds"))
    c.eval_seeds = j["eval_seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("data_dir")) c.data_dir = j["data_dir"].get<std::string>();
  if (j.contains("td3")) {
    const json& t = j["td3"];
    if (t.contains("gamma")) c.td3.gamma = t["gamma"].get<double>();
    if (t.contains("tau")) c.td3.tau = t["tau"].get<double>();
    if (t.contains("policy_delay")) c.td3.policy_delay = t["policy_delay"].get<int>();
    if (t.contains("expl_noise")) c.td3.expl_noise = t["expl_noise"].get<double>();
    if (t.contains("target_noise")) c.td3.target_noise = t["target_noise"].get<double>();
    if (t.contains("target_noise_clip"))
      c.td3.target_noise_clip = t["target_noise_clip"].get<double>();
    if (t.contains("batch_size")) c.td3.batch_size = t["batch_size"].get<int>();
    if (t.contains("replay_capacity"))
      c.td3.replay_capacity = t["replay_capacity"].get<int>();
    if (t.contains("warmup_steps")) c.td3.warmup_steps = t["warmup_steps"].get<int>();
    if (t.contains("actor_lr")) c.td3.actor_lr = t["actor_lr"].get<double>();
    if (t.contains("critic_lr")) c.td3.critic_lr = t["critic_lr"].get<double>();
  }
  if (j.contains("a2c")) {
    const json& a = j["a2c"];
    if (a.contains("gamma")) c.a2c.gamma = a["gamma"].get<double>();
    if (a.contains("lambda")) c.a2c.lambda = a["lambda"].get<double>();
    if (a.contains("n_steps")) c.a2c.n_steps = a["n_steps"].get<int>();
    if (a.contains("actor_lr")) c.a2c.actor_lr = a["actor_lr"].get<double>();
    if (a.contains("value_lr")) c.a2c.value_lr = a["value_lr"].get<double>();
    if (a.contains("value_coef")) c.a2c.value_coef = a["value_coef"].get<double>();
    if (a.contains("init_log_std")) c.a2c.init_log_std = a["init_log_std"].get<double>();
  }
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  json j = config_json(cfg);
  j.erase("out_dir");  // the same experiment in a different folder is the same run
  return fnv1a(j.dump());
}

std::string output_root() {
  const char* env = std::getenv("SAFERL_OUT");
  return env ? env : ".";
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto env = make_env(cfg.env_id, {cfg.data_dir});

  const std::string root = output_root();
  const fs::path out = fs::path(cfg.out_dir).is_absolute()
                           ? fs::path(cfg.out_dir)
                           : fs::path(root) / cfg.out_dir;
  fs::create_directories(out);
  {
    std::ofstream f(out / "config.json");
    f << config_to_json(cfg) << "\n";
  }
  const std::string hash = hash_hex(config_hash(cfg));
  {
    json m;
    m["config_hash"] = hash;
    m["code_version"] = kCodeVersion;
    std::ofstream f(out / "manifest.json");
    f << m.dump(2) << "\n";
  }

  const int n_seeds = int(cfg.train_seeds.size());
  std::vector<SeedResult> results(size_t(n_seeds));
  // Seeds are independent workers; nested omp regions inside each trainer
  // collapse to serial when this outer loop is active.
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n_seeds; ++i) {
    const std::string seed_dir = (out / ("seed_" + std::to_string(cfg.train_seeds[size_t(i)]))).string();
    results[size_t(i)] = train_one_seed(cfg, *env, cfg.train_seeds[size_t(i)], seed_dir);
  }

  RunSummary s;
  const Eigen::Index per = results.empty() ? 0 : results[0].returns.size();
  s.final_returns.resize(per * n_seeds);
  s.interventions.resize(per * n_seeds);
  for (int i = 0; i < n_seeds; ++i) {
    s.final_returns.segment(i * per, per) = results[size_t(i)].returns;
    s.interventions.segment(i * per, per) = results[size_t(i)].interventions;
    s.violations += results[size_t(i)].violations;
    s.empty_safe_sets += results[size_t(i)].empty_safe_sets;
  }
  Rng boot_rng(config_hash(cfg));
  const IqmCi ci = iqm_ci(s.final_returns, 2000, 0.95, boot_rng);
  s.iqm = ci.iqm;
  s.ci_lo = ci.lo;
  s.ci_hi = ci.hi;
  s.manifest_hash = hash;

  {
    json j;
    j["env"] = cfg.env_id;
    j["algorithm"] = cfg.algorithm;
    j["wiring"] = to_string(cfg.wiring);
    j["mitigation"] = to_string(cfg.mitigation);
    j["w"] = cfg.w;
    j["config_hash"] = hash;
    j["code_version"] = kCodeVersion;
    j["returns"] = std::vector<double>(s.final_returns.data(),
                                       s.final_returns.data() + s.final_returns.size());
    j["interventions"] = std::vector<double>(
        s.interventions.data(), s.interventions.data() + s.interventions.size());
    j["iqm"] = s.iqm;
    j["ci_lo"] = s.ci_lo;
    j["ci_hi"] = s.ci_hi;
    j["violations"] = s.violations;
    j["empty_safe_sets"] = s.empty_safe_sets;
    std::ofstream f(out / "summary.json");
    f << j.dump(2) << "\n";
  }
  return s;
}

Eigen::VectorXd eval_run(const std::string& run_dir, int episodes,
                         const std::string& trace_csv) {
  const fs::path dir(run_dir);
  const ExperimentConfig cfg = load_experiment_config((dir / "config.json").string());
  const auto env = make_env(cfg.env_id, {cfg.data_dir});

  // The run dir may be an experiment dir (take the first seed) or a seed dir.
  fs::path ckpt = dir / "final.ckpt";
  if (!fs::exists(ckpt))
    ckpt = dir / ("seed_" + std::to_string(cfg.train_seeds.at(0))) / "final.ckpt";
  const auto sections = load_checkpoint(ckpt.string());
  const auto find = [&](const std::string& name) -> const CheckpointSection& {
    for (const auto& s : sections)
      if (s.name == name) return s;
    throw ConfigError("checkpoint section missing: " + name);
  };

  std::vector<std::uint64_t> seeds;
  for (int e = 0; e < episodes; ++e)
    seeds.push_back(cfg.eval_seeds[size_t(e) % cfg.eval_seeds.size()] + 1000 * (e / int(cfg.eval_seeds.size())));

  EvalResult ev;
  DeterministicActor actor;
  GaussianPolicy pol;
  const bool td3 = cfg.algorithm == "td3";
  if (td3) {
    actor.net = mlp_from_section(find("actor"));
    actor.center = find("actor_center").data;
    actor.scale = find("actor_scale").data;
    ev = evaluate_actor(*env, actor, cfg.wiring, seeds);
  } else {
    pol.mean = mlp_from_section(find("policy_mean"));
    pol.log_std = find("log_std").data;
    ev = evaluate_gaussian(*env, pol, cfg.wiring, seeds);
  }

  if (!trace_csv.empty()) {
    std::ofstream f(trace_csv);
    if (!f) throw ConfigError("cannot write trace: " + trace_csv);
    f << "t";
    for (Eigen::Index i = 0; i < env->state_dim(); ++i) f << ",x" << i;
    for (Eigen::Index i = 0; i < env->action_dim(); ++i) f << ",u" << i;
    for (Eigen::Index i = 0; i < env->action_dim(); ++i) f << ",u_phi" << i;
    f << ",r,intervention\n";
    EnvState s = env->reset(seeds.at(0));
    for (int t = 0; t < env->horizon(); ++t) {
      const Eigen::VectorXd u =
          (td3 ? actor.forward(env->obs(s)) : pol.mean_forward(env->obs(s)))
              .cwiseMax(env->action_lo())
              .cwiseMin(env->action_hi());
      SafeStepResult ssr;
      if (cfg.wiring == WiringMode::Unsafe) {
        ssr.step = env->step(s, u);
        ssr.step.applied = u;
      } else {
        ssr = se_env_step(*env, s, u, 0.0, false);
        if (ssr.empty_safe_set) break;
      }
      f << t;
      for (Eigen::Index i = 0; i < s.x.size(); ++i) f << "," << fmt17(s.x(i));
      for (Eigen::Index i = 0; i < u.size(); ++i) f << "," << fmt17(u(i));
      for (Eigen::Index i = 0; i < ssr.step.applied.size(); ++i)
        f << "," << fmt17(ssr.step.applied(i));
      f << "," << fmt17(ssr.step.reward) << "," << (ssr.step.intervention ? 1 : 0) << "\n";
      s = ssr.step.next;
      if (ssr.step.done) break;
    }
  }
  return ev.returns;
}

}  // namespace saferl
