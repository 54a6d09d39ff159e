#include <fstream>

#include <json.hpp>

#include "saferl/envs/pendulum.hpp"
#include "saferl/envs/quadrotor.hpp"
#include "saferl/envs/seeker.hpp"
#include "saferl/errors.hpp"

namespace saferl {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw ConfigError("bad json in " + path + ": " + e.what());
  }
  return j;
}

Eigen::VectorXd to_vector(const json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(Eigen::Index(i)) = j[i].get<double>();
  return v;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void validate_control_invariance(const SafeActionSet& set, int max_samples) {
  if (set.is_direct()) return;
  const Zonotope& x_phi = set.safe_states();
  const Eigen::Index eta = x_phi.num_generators();

  std::vector<Eigen::VectorXd> states;
  if (eta <= 12 && (Eigen::Index(1) << eta) <= max_samples) {
    for (Eigen::Index mask = 0; mask < (Eigen::Index(1) << eta); ++mask) {
      Eigen::VectorXd sigma(eta);
      for (Eigen::Index k = 0; k < eta; ++k) sigma(k) = (mask >> k) & 1 ? 1.0 : -1.0;
      states.push_back(x_phi.center + x_phi.generators * sigma);
    }
  } else {
    Rng rng(0xC0FFEEULL);
    for (int i = 0; i < max_samples; ++i) {
      Eigen::VectorXd sigma(eta);
      for (Eigen::Index k = 0; k < eta; ++k) sigma(k) = rng.uniform() < 0.5 ? -1.0 : 1.0;
      states.push_back(x_phi.center + x_phi.generators * sigma);
    }
  }

  for (const auto& x : states) {
    const ContainmentConstraints c = set.constraints(x);
    Eigen::VectorXd u_mid = Eigen::VectorXd::Zero(set.action_dim());
    const ProjectionSolution sol = project_onto(c, u_mid);
    if (sol.status == QpStatus::Infeasible)
      throw ConfigError(
          "safe-state zonotope is not one-step control invariant under the shipped dynamics");
    if (sol.status == QpStatus::MaxIter)
      throw NumericalError("control-invariance validation: projection did not converge");
  }
}

std::unique_ptr<Env> make_env(const std::string& id, const EnvOptions& opts) {
  const std::string base = opts.data_dir + "/" + id;
  if (id == "pendulum") {
    const json j = load_json(base + ".json");
    PendulumConfig c;
    maybe(j, "g", c.g);
    maybe(j, "m", c.m);
    maybe(j, "l", c.l);
    maybe(j, "dt", c.dt);
    maybe(j, "max_torque", c.max_torque);
    maybe(j, "horizon", c.horizon);
    maybe(j, "reset_theta", c.reset_theta);
    maybe(j, "reset_theta_dot", c.reset_theta_dot);
    c.x_phi = load_zonotope(opts.data_dir + "/" + j.at("x_phi").get<std::string>());
    return std::make_unique<PendulumEnv>(std::move(c));
  }
  if (id == "quadrotor") {
    const json j = load_json(base + ".json");
    QuadrotorConfig c;
    maybe(j, "k_thrust", c.k_thrust);
    maybe(j, "d0", c.d0);
    maybe(j, "d1", c.d1);
    maybe(j, "n0", c.n0);
    maybe(j, "g", c.g);
    maybe(j, "dt", c.dt);
    maybe(j, "horizon", c.horizon);
    if (j.contains("u_lo")) c.u_lo = to_vector(j.at("u_lo"));
    if (j.contains("u_hi")) c.u_hi = to_vector(j.at("u_hi"));
    if (j.contains("w_max")) c.w_max = to_vector(j.at("w_max"));
    if (j.contains("reset_half")) c.reset_half = to_vector(j.at("reset_half"));
    c.x_phi = load_zonotope(opts.data_dir + "/" + j.at("x_phi").get<std::string>());
    return std::make_unique<QuadrotorEnv>(std::move(c));
  }
  if (id == "seeker") {
    SeekerConfig c;
    std::ifstream probe(base + ".json");
    if (probe) {
      const json j = load_json(base + ".json");
      maybe(j, "dt", c.dt);
      maybe(j, "a_max", c.a_max);
      maybe(j, "horizon", c.horizon);
      maybe(j, "map_half", c.map_half);
      maybe(j, "goal_radius", c.goal_radius);
      maybe(j, "obstacle_r_lo", c.obstacle_r_lo);
      maybe(j, "obstacle_r_hi", c.obstacle_r_hi);
      maybe(j, "margin", c.margin);
      maybe(j, "spawn_half", c.spawn_half);
      maybe(j, "min_start_goal_dist", c.min_start_goal_dist);
    }
    return std::make_unique<SeekerEnv>(c);
  }
  throw ConfigError("unknown environment id: " + id);
}

}  // namespace saferl
