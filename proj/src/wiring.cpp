#include "saferl/wiring.hpp"

#include "saferl/constants.hpp"
#include "saferl/errors.hpp"

namespace saferl {

std::string to_string(WiringMode m) {
  switch (m) {
    case WiringMode::Unsafe: return "unsafe";
    case WiringMode::SafeEnv: return "se";
    case WiringMode::SafePolicy: return "sp";
  }
  return "?";
}

std::string to_string(Mitigation m) {
  switch (m) {
    case Mitigation::None: return "none";
    case Mitigation::Penalty: return "penalty";
    case Mitigation::Psl: return "psl";
    case Mitigation::PenC: return "penc";
  }
  return "?";
}

WiringMode wiring_from_string(const std::string& s) {
  if (s == "unsafe") return WiringMode::Unsafe;
  if (s == "se") return WiringMode::SafeEnv;
  if (s == "sp") return WiringMode::SafePolicy;
  throw ConfigError("unknown wiring: " + s);
}

Mitigation mitigation_from_string(const std::string& s) {
  if (s == "none") return Mitigation::None;
  if (s == "penalty") return Mitigation::Penalty;
  if (s == "psl") return Mitigation::Psl;
  if (s == "penc") return Mitigation::PenC;
  throw ConfigError("unknown mitigation: " + s);
}

void validate_combination(WiringMode wiring, Mitigation mitigation) {
  const bool ok = (wiring == WiringMode::Unsafe && mitigation == Mitigation::None) ||
                  (wiring == WiringMode::SafeEnv &&
                   (mitigation == Mitigation::None || mitigation == Mitigation::Penalty)) ||
                  (wiring == WiringMode::SafePolicy &&
                   (mitigation == Mitigation::None || mitigation == Mitigation::Psl ||
                    mitigation == Mitigation::PenC));
  if (!ok)
    throw ConfigError("invalid wiring/mitigation combination: " + to_string(wiring) + "/" +
                      to_string(mitigation));
}

double penalty(const Eigen::VectorXd& u, const Eigen::VectorXd& u_phi, double w) {
  if (u.size() != u_phi.size()) throw DimensionError("penalty: size mismatch");
  const Eigen::VectorXd d = u - u_phi;
  if ((d.array() == 0.0).all()) return 0.0;
  return w * d.squaredNorm();
}

namespace {

SafeStepResult step_with(const Env& env, const EnvState& s, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& u_phi, ProjectionSolution sol, double w,
                         bool subtract_penalty) {
  SafeStepResult out;
  out.sol = std::move(sol);
  out.violation = out.sol.constraint_violation;
  out.step = env.step(s, u_phi);
  out.step.applied = u_phi;
  out.step.intervention = (u - u_phi).lpNorm<Eigen::Infinity>() > kEpsFeas;
  out.step.penalty = penalty(u, u_phi, w);
  if (subtract_penalty) out.step.reward -= out.step.penalty;
  return out;
}

}  // namespace

SafeStepResult se_env_step(const Env& env, const EnvState& s, const Eigen::VectorXd& u,
                           double w, bool subtract_penalty) {
  const auto set = env.safe_action_set(s);
  SafeStepResult out;
  if (!set) {
    out.empty_safe_set = true;
    return out;
  }
  ProjectionSolution sol = project(*set, s.x, u);
  if (sol.status == QpStatus::Infeasible) {
    out.empty_safe_set = true;
    return out;
  }
  if (sol.status == QpStatus::MaxIter)
    throw NumericalError("se_env_step: projection exceeded the solver budget");
  const Eigen::VectorXd u_phi = sol.u_phi;
  return step_with(env, s, u, u_phi, std::move(sol), w, subtract_penalty);
}

SafeguardedAction sp_safeguard(const Env& env, const EnvState& s, const Eigen::VectorXd& u,
                               bool want_jacobian) {
  SafeguardedAction act;
  const auto set = env.safe_action_set(s);
  if (!set) {
    act.empty_safe_set = true;
    return act;
  }
  const ContainmentConstraints c = set->constraints(s.x);
  act.sol = project_onto(c, u);
  if (act.sol.status == QpStatus::Infeasible) {
    act.empty_safe_set = true;
    return act;
  }
  if (act.sol.status == QpStatus::MaxIter)
    throw NumericalError("sp_safeguard: projection exceeded the solver budget");
  act.u_phi = act.sol.u_phi;
  if (want_jacobian) {
    act.jac = safeguard_jacobian(act.sol, c);
    act.has_jac = true;
  }
  return act;
}

SafeStepResult sp_env_step(const Env& env, const EnvState& s, const Eigen::VectorXd& u,
                           const SafeguardedAction& act, double w, bool subtract_penalty) {
  if (act.empty_safe_set) {
    SafeStepResult out;
    out.empty_safe_set = true;
    return out;
  }
  return step_with(env, s, u, act.u_phi, act.sol, w, subtract_penalty);
}

}  // namespace saferl
