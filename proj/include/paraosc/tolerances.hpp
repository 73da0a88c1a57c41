#pragma once

// Central registry of the numerical tolerances used across the library.
// Hard-error thresholds abort a run; pass thresholds gate validation reports.

namespace paraosc::tol {

// condition (ii): || i V eps V^T - eps ||_max
inline constexpr double canonical_abort = 1e-6;
inline constexpr double canonical_pass = 1e-8;

// condition (i): creation rows are conjugates of annihilation rows
inline constexpr double conjugacy_pass = 1e-9;
inline constexpr double condition_abort = 1e-6;

// propagator realness (imaginary parts stripped after this check)
inline constexpr double propagator_imag_warn = 1e-9;
inline constexpr double propagator_imag_abort = 1e-7;

// quadratic-invariant realness
inline constexpr double lr_imag_abort = 1e-8;
inline constexpr double lr_real_pass = 1e-10;

// schedule symmetry handling: silently symmetrize below warn, reject above abort
inline constexpr double symmetry_warn = 1e-12;
inline constexpr double symmetry_abort = 1e-6;

// ladder-representation conversion checks
inline constexpr double ladder_real = 1e-10;
inline constexpr double ladder_roundtrip = 1e-10;

// finite-difference invariance residuals, quoted at probe step 1e-3
inline constexpr double fd_probe_step = 1e-3;
inline constexpr double fd_residual_pass = 1e-6;

// Heisenberg-propagator identities: V(t) Z(t) = V(0) and Z eps Z^T = eps
inline constexpr double heisenberg_identity_pass = 1e-8;
inline constexpr double classical_match = 1e-7;

// state moments
inline constexpr double heisenberg_bound_slack = 1e-9;
inline constexpr double covariance_psd_slack = 1e-10;

// Fock-space oracle
inline constexpr double oracle_agreement = 1e-4;
inline constexpr double oracle_certify = 1e-5;
inline constexpr double oracle_norm_abort = 1e-6;
inline constexpr double coherent_tail = 1e-8;

}  // namespace paraosc::tol
