#pragma once

#include <cstdint>
#include <vector>

#include "saferl/policy.hpp"
#include "saferl/wiring.hpp"

namespace saferl {

// Deterministic evaluation (no exploration noise; TD3 uses the actor
// output, A2C the Gaussian mean; safeguarded wirings keep projecting).
// Returns raw environment returns, never penalty-augmented. Episodes are
// independent and run in parallel.
struct EvalResult {
  Eigen::VectorXd returns;        // one per episode
  Eigen::VectorXd interventions;  // safeguard interventions per episode
  long violations = 0;            // executed-action safety violations
  long empty_safe_sets = 0;
};

EvalResult evaluate_actor(const Env& env, const DeterministicActor& actor, WiringMode wiring,
                          const std::vector<std::uint64_t>& episode_seeds);

EvalResult evaluate_gaussian(const Env& env, const GaussianPolicy& policy, WiringMode wiring,
                             const std::vector<std::uint64_t>& episode_seeds);

}  // namespace saferl
