#pragma once

// Numerical tolerances shared across the projection, sensitivity, and
// safety-check layers. Keep them here so every module agrees on what
// "feasible" and "active" mean.

namespace saferl {

// Constraint satisfaction tolerance for returned solutions and for the
// safety violation counter.
inline constexpr double kEpsFeas = 1e-7;

// A constraint row counts as active when |slack| <= kEpsAct. Duals below
// this level are treated as weakly active and dropped from sensitivities.
inline constexpr double kEpsAct = 1e-6;

// Accepted KKT residual for a Solved projection.
inline constexpr double kEpsKkt = 1e-8;

// Tikhonov term on auxiliary variables (Gamma, omega, nu) that keeps the
// projection QP strictly convex while leaving the action block untouched.
inline constexpr double kQpAuxReg = 1e-10;

// Dual active-set iteration cap; exceeding it is a hard numerical error.
inline constexpr int kQpMaxIter = 500;

// Conditioning limit for the reduced KKT factorization in the sensitivity
// computation; beyond this the active set is reported as SingularKkt.
inline constexpr double kKktCondLimit = 1e12;

}  // namespace saferl
