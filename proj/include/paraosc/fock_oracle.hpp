#pragma once

// Independent brute-force validator: evolves the state in a truncated Fock
// space under H(t) with the exponential midpoint rule (matrix exponential by
// scaling-and-squaring) and reads the same moments back out. Deliberately
// slow and simple; its only job is independence from the invariant-method
// code path.

#include <Eigen/SparseCore>

#include <vector>

#include "paraosc/hamiltonian.hpp"
#include "paraosc/linear_solver.hpp"
#include "paraosc/moments.hpp"
#include "paraosc/tolerances.hpp"

namespace paraosc {

struct FockConfig {
  Eigen::Index cutoff = 40;         // per-mode dimension K; total dim K^N <= 4096
  double dt = 0.0;                  // substep; <= 0 steps at the grid spacing
  bool estimate_truncation = true;  // re-run at K+10 and compare
  double certify_tol = tol::oracle_certify;
};

/// Truncated ladder operators at the reference frequencies, plus the cached
/// quadratic products z^mu z^nu used to assemble H.
struct FockOperators {
  Eigen::Index n_modes = 0;
  Eigen::Index cutoff = 0;
  Eigen::Index dim = 0;
  std::vector<Eigen::SparseMatrix<Complex>> z;                // q_1..q_N, p_1..p_N
  std::vector<std::vector<Eigen::SparseMatrix<Complex>>> zz;  // z[mu] * z[nu]
};

FockOperators build_fock_operators(Eigen::Index n_modes, Eigen::Index cutoff,
                                   const Eigen::VectorXd& omegas);

struct OracleResult {
  MomentReport report;
  double truncation_sensitivity = -1.0;  // max moment shift from cutoff K -> K+10
  double norm_drift = 0.0;               // max | <psi|psi> - 1 | over the run
};

OracleResult oracle_moments(const HamiltonianSchedule& ham, const StateSpec& state,
                            const ReferenceFrequencies& omegas, const FockConfig& cfg,
                            const TimeGridSpec& grid);

}  // namespace paraosc
