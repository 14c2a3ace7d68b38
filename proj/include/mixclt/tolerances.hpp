#pragma once

namespace mixclt::tol {

/// Row sums of transition matrices and of the initial law.
inline constexpr double kStochastic = 1e-12;
/// Derived probabilistic quantities: marginals, joint masses, means.
inline constexpr double kDerived = 1e-10;
/// Relative slack on every inequality check.
inline constexpr double kRelative = 1e-9;
/// Absolute slack for quantities near zero.
inline constexpr double kAbsolute = 1e-12;
/// Additive slack for the coefficient inequalities rho_k <= rho1^k and rho1 <= sqrt(delta1).
inline constexpr double kCoefficient = 1e-9;
/// Means below this (relative to max |f|) are treated as already centered.
inline constexpr double kCenteringNoise = 1e-14;

}  // namespace mixclt::tol
