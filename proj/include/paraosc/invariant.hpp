#pragma once

// Primary invariants b^mu = v^mu_nu(t) z^nu + u^mu(t), the fast inverse
// V^-1 = i eps V^T eps^T, the quadratic Lewis-Riesenfeld invariant
// I = sum_i w_i (b_i^+ b_i + 1/2) expanded into (G, g, c), and finite-
// difference invariance residuals on the coefficient representation.

#include <vector>

#include "paraosc/linear_solver.hpp"

namespace paraosc {

struct PrimaryInvariantSet {
  Eigen::Index n_modes = 0;
  Eigen::VectorXd grid;
  std::vector<Eigen::MatrixXcd> V;  // rows 0..N-1 annihilation, N..2N-1 creation
  std::vector<Eigen::VectorXcd> u;  // annihilation components; u^{N+i} = conj(u^i)
  Eigen::VectorXd omegas;
  double max_condition_i_residual = 0.0;   // conjugate-row structure
  double max_condition_ii_residual = 0.0;  // || i V eps V^T - eps ||_max
};

/// Packages a solution record as the invariant coefficient set after checking
/// conditions (i) and (ii); a residual above 1e-6 is a hard error naming the
/// first offending time.
PrimaryInvariantSet build_primary(const SolutionRecord& rec);

/// V^-1 = i eps V^T eps^T, valid only for canonical V (condition (ii) to
/// 1e-6). The result has block layout [[phi, phi*], [pi, pi*]].
Eigen::MatrixXcd fast_inverse(const Eigen::MatrixXcd& V, const SymplecticForm& form);

struct QuadraticInvariant {
  Eigen::Index n_modes = 0;
  Eigen::VectorXd grid;
  std::vector<Eigen::MatrixXd> G;  // real symmetric 2N x 2N
  std::vector<Eigen::VectorXd> g;
  std::vector<double> c;
  Eigen::VectorXd omegas;  // spectrum data: eigenvalues are sum_i w_i (n_i + 1/2)
  double max_imag_residual = 0.0;
};

/// I = G_{mu nu} z^mu z^nu + g_mu z^mu + c from the primary set, using
/// [q, p] = i. Imaginary parts are checked (abort above 1e-8) then dropped.
QuadraticInvariant lr_invariant(const PrimaryInvariantSet& inv);

/// The time-independent eigenvalue sum_i omega_i (n_i + 1/2).
double lr_eigenvalue(const Eigen::VectorXd& omegas, const std::vector<long>& n);

/// Max-norm of the invariance equation on coefficients at time t, probed with
/// central differences of half-width dt (both must be grid-aligned):
///   v-equation: (V(t+dt) - V(t-dt))/2dt + 2 V(t) eps A(t)
///   u-equation: (u(t+dt) - u(t-dt))/2dt + (V(t) eps B(t))_{1..N}
double invariant_residual(const PrimaryInvariantSet& inv, const HamiltonianSchedule& ham,
                          double t, double dt);

/// Same probe for the quadratic invariant, on (G, g, c):
///   G: dG/dt - 2 A eps G + 2 G eps A
///   g: dg/dt - 2 A eps g + 2 G eps B
///   c: dc/dt + g . (eps B)
double invariant_residual(const QuadraticInvariant& quad, const HamiltonianSchedule& ham,
                          double t, double dt);

}  // namespace paraosc
