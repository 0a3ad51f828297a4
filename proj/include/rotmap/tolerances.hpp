#pragma once

// Central table of numeric tolerances. Every guard and invariant threshold
// in the library reads from here so the whole suite can be audited in one
// place.

namespace rotmap::tol {

// Decomposition quality.
inline constexpr double RECON_TOL = 1e-10;   // ‖U diag(d) Vᵀ − M‖_F / ‖M‖_F
inline constexpr double ORTHO_TOL = 1e-12;   // ‖QᵀQ − I‖_max for U, V, eigenvector bases
inline constexpr double EIG_RESIDUAL_TOL = 1e-10;  // ‖A v − λ v‖ per column

// Rank decisions.
inline constexpr double RANK_REL_TOL = 1e-7;  // default for numeric_rank

// Rotation validity.
inline constexpr double ROTATION_TOL = 1e-9;        // RᵀR = I, det = +1 (type invariant)
inline constexpr double ROTATION_INPUT_TOL = 1e-6;  // accepted slack on user-supplied matrices

// Mapping domain guards.
inline constexpr double QUAT_NORM_MIN = 1e-12;      // ‖x‖ below which x/‖x‖ is refused
inline constexpr double SIXD_RANK_TOL = 1e-9;       // collinearity threshold on the 3×2 input
inline constexpr double PROCRUSTES_GAP_TOL = 1e-9;  // d₂ − d₃ uniqueness gap when det ≤ 0
inline constexpr double SYM10_GAP_TOL = 1e-9;       // λ₂ − λ₁ multiplicity gap
inline constexpr double PROCRUSTES_DERIV_GUARD = 1e-7;  // denominator guard in the closed form

// Series switch-over points.
inline constexpr double EXP_TAYLOR_EPS = 1e-4;   // ‖v‖ below which Rodrigues uses series
inline constexpr double SMALL_NORM_EPS = 1e-9;   // generic "treat as zero" vector norm

}  // namespace rotmap::tol
