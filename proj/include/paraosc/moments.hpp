#pragma once

// Position/momentum statistics of invariant eigenstates and coherent states:
// number-state variances sum_j (2n_j+1)|phi_ij|^2, |pi_ij|^2, coherent-state
// variances without the occupation factor, coherent means phi alpha - phi u
// + c.c., and the full symmetrized covariance Re(W D W^+) with W = [[phi],[pi]].
//
// The alpha <-> z(0) correspondence fixed by the initial conditions is
//   q_i(0) = (alpha_i + conj(alpha_i)) / sqrt(2 w_i),
//   p_i(0) = -i sqrt(w_i/2) (alpha_i - conj(alpha_i)).

#include <vector>

#include "paraosc/linear_solver.hpp"

namespace paraosc {

struct StateSpec {
  enum class Kind { Number, Coherent };
  Kind kind = Kind::Number;
  std::vector<long> n;       // Number: occupations n_i >= 0
  Eigen::VectorXcd alpha;    // Coherent: amplitudes

  static StateSpec number(std::vector<long> occupations);
  static StateSpec coherent(Eigen::VectorXcd amplitudes);
};

struct MomentReport {
  Eigen::Index n_modes = 0;
  Eigen::VectorXd grid;
  std::vector<Eigen::VectorXd> mean_q, mean_p;
  std::vector<Eigen::VectorXd> var_q, var_p;
  std::vector<Eigen::MatrixXd> cov;  // symmetrized 2N x 2N covariance
  std::vector<Eigen::VectorXd> uncertainty;  // Delta q_i Delta p_i
};

MomentReport number_state_moments(const SolutionRecord& rec, const std::vector<long>& n);
MomentReport coherent_state_moments(const SolutionRecord& rec, const Eigen::VectorXcd& alpha);
MomentReport state_moments(const SolutionRecord& rec, const StateSpec& state);

/// sqrt(var_q_i * var_p_i) per mode and time.
std::vector<Eigen::VectorXd> uncertainty_products(const MomentReport& report);

/// Phase-space point z(0) whose coherent state has amplitudes alpha.
Eigen::VectorXd coherent_initial_point(const Eigen::VectorXcd& alpha,
                                       const Eigen::VectorXd& omegas);

}  // namespace paraosc
