#pragma once

// Exact Heisenberg-picture evolution assembled from the solution matrix:
//   z(t) = Z(t) z(0) + d(t),  Z(t) = V^-1(t) V(0),
//   d(t) = -V^-1(t) [u_full(t) - u_full(0)]
// where u_full is the 2N drift with conjugate creation block. Z and d compose
// to a real symplectic affine map; imaginary parts are checked and stripped.

#include <vector>

#include "paraosc/invariant.hpp"
#include "paraosc/linear_solver.hpp"

namespace paraosc {

/// The 2N drift (u, conj(u)). Single owner of that convention.
Eigen::VectorXcd full_drift(const Eigen::VectorXcd& u);

struct Propagator {
  Eigen::Index n_modes = 0;
  Eigen::VectorXd grid;
  std::vector<Eigen::MatrixXd> Z;
  std::vector<Eigen::VectorXd> d;
  double max_imag_residual = 0.0;
  double max_symplectic_residual = 0.0;  // || Z eps Z^T - eps ||_max over the grid
};

Propagator build_propagator(const SolutionRecord& rec);

/// Finite-difference defect of dZ/dt = M(t) Z and dd/dt = M(t) d + eps B with
/// M(t) = 2 eps A(t). Central differences at interior times; second-order
/// one-sided stencils at the two grid ends.
double heisenberg_residual(const Propagator& prop, const HamiltonianSchedule& ham, double t,
                           double dt);

/// Coefficient tables of q_i(t), p_i(t) expanded over q_k(0), p_k(0) and a
/// scalar drift term, before hermitian-conjugate folding.
struct QpReconstruction {
  Eigen::MatrixXcd q_on_q0, q_on_p0;  // row i: coefficients in q_i(t)
  Eigen::MatrixXcd p_on_q0, p_on_p0;
  Eigen::VectorXcd q_scalar, p_scalar;

  /// Coefficients with +h.c. folded in: equals the propagator Z block-wise.
  Eigen::MatrixXd folded_map() const;
  /// Scalar terms with +h.c. folded in: equals the propagator d.
  Eigen::VectorXd folded_shift() const;
};

QpReconstruction reconstruct_qp(const PrimaryInvariantSet& inv, double t);

}  // namespace paraosc
