#pragma once

#include <Eigen/Dense>
#include <string>

#include "saferl/env.hpp"
#include "saferl/sensitivity.hpp"

namespace saferl {

// Where the safeguard sits. Unsafe: no projection (actions only clipped to
// the actuation box). SafeEnv: projection hidden inside the environment
// boundary; the agent's action is the pre-projection u. SafePolicy: the
// projection is the policy's terminal layer; critics condition on u_phi and
// gradients flow through the safeguard Jacobian.
enum class WiringMode { Unsafe, SafeEnv, SafePolicy };

enum class Mitigation { None, Penalty, Psl, PenC };

std::string to_string(WiringMode m);
std::string to_string(Mitigation m);
WiringMode wiring_from_string(const std::string& s);
Mitigation mitigation_from_string(const std::string& s);

// Valid combinations: Unsafe/None, SafeEnv/{None, Penalty},
// SafePolicy/{None, Psl, PenC}. Throws ConfigError otherwise.
void validate_combination(WiringMode wiring, Mitigation mitigation);

// Squared-distance penalty: exactly 0 for an unmodified action.
double penalty(const Eigen::VectorXd& u, const Eigen::VectorXd& u_phi, double w);

// One stored interaction. r already carries the wiring's reward convention
// (SE with the penalty mitigation stores the augmented reward); penalty
// keeps the h that was charged. x/x_next are full environment states so safe
// sets can be rebuilt during replay; jacobian is filled in SafePolicy mode.
struct Transition {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  Eigen::VectorXd u_phi;
  double r = 0.0;
  Eigen::VectorXd x_next;
  bool done = false;
  double penalty = 0.0;
  Eigen::MatrixXd jacobian;
};

struct SafeStepResult {
  StepResult step;
  ProjectionSolution sol;
  bool empty_safe_set = false;  // distinguished terminal outcome
  double violation = 0.0;       // constraint violation of the executed action
};

// SE wiring: builds the safe set at s, projects u internally, steps the raw
// environment with u_phi, and reports intervention/penalty in the info
// block. subtract_penalty implements the reward augmentation r - h.
SafeStepResult se_env_step(const Env& env, const EnvState& s, const Eigen::VectorXd& u,
                           double w, bool subtract_penalty);

// SP wiring, policy side: safeguard u at state s, optionally with the
// backward-pass Jacobian.
struct SafeguardedAction {
  Eigen::VectorXd u_phi;
  ProjectionSolution sol;
  SafeguardJacobian jac;
  bool empty_safe_set = false;
  bool has_jac = false;
};
SafeguardedAction sp_safeguard(const Env& env, const EnvState& s, const Eigen::VectorXd& u,
                               bool want_jacobian);

// SP wiring, environment side: step with the already-safe u_phi and fill the
// same info/penalty bookkeeping as the SE path so the two wirings stay
// step-for-step comparable.
SafeStepResult sp_env_step(const Env& env, const EnvState& s, const Eigen::VectorXd& u,
                           const SafeguardedAction& act, double w, bool subtract_penalty);

}  // namespace saferl
