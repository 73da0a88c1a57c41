#pragma once

// Time-dependent quadratic Hamiltonians
//   H(t) = A_{mu nu}(t) z^mu z^nu + B_mu(t) z^mu + C(t)
// represented as coefficient schedules over a closed time interval, plus the
// analytic presets and the ladder-operator (A-cal, B-cal, lambda) conversion.
//
// C(t) is carried through the data model and echoed in reports but never
// enters the dynamics: it contributes only a global phase.

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "paraosc/errors.hpp"
#include "paraosc/symplectic.hpp"

namespace paraosc {

/// One-sided evaluation at a discontinuity: the value approached from below
/// (Left) or from above (Right). Continuous schedules ignore the side.
enum class Side { Left, Right };

struct Coefficients {
  Eigen::MatrixXd A;  // 2N x 2N, real symmetric
  Eigen::VectorXd B;  // 2N
  double C = 0.0;
};

class HamiltonianSchedule {
 public:
  using EvalFn = std::function<Coefficients(double, Side)>;

  HamiltonianSchedule(Eigen::Index n_modes, double t_begin, double t_end, EvalFn eval,
                      std::vector<double> breakpoints = {}, std::string label = "custom",
                      bool tabulated = false);

  Eigen::Index n_modes() const { return n_modes_; }
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }

  /// Coefficients at time t; side selects the limit taken at a breakpoint.
  Coefficients at(double t, Side side = Side::Right) const;

  /// Interior times where the coefficients jump or kink, sorted ascending.
  /// Integrators align their grids to these so every step sees smooth data.
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  const std::string& label() const { return label_; }

  /// True for sampled-table schedules (linear interpolation between samples,
  /// which drops the stepper order from 4 to 2).
  bool tabulated() const { return tabulated_; }

 private:
  Eigen::Index n_modes_;
  double t_begin_;
  double t_end_;
  EvalFn eval_;
  std::vector<double> breakpoints_;
  std::string label_;
  bool tabulated_;
};

/// Analytic test-scenario factory. Known presets and their parameters:
///   constant_sho     omega [, omega2, ...]
///   driven_sho       omega, f
///   parametric_ramp  omega0, omega1 [, ramp_start, ramp_end]
///   sudden_jump      omega0, omega1 [, t_jump]  (default: interval midpoint)
///   coupled_pair_qq  omega1, omega2, g          (g q_1 q_2)
///   coupled_pair_pp  omega1, omega2, g          (g p_1 p_2)
///   coupled_qp       omega1, omega2, g          (g q_1 p_2)
HamiltonianSchedule preset(const std::string& name, const std::map<std::string, double>& params,
                           double t_begin, double t_end);

/// Sampled coefficient tables with linear interpolation. Nonsymmetric A
/// samples are symmetrized as (A + A^T)/2; a symmetry defect above 1e-6 is
/// rejected, one above 1e-12 draws a warning on stderr.
HamiltonianSchedule tabulated_schedule(Eigen::Index n_modes, std::vector<double> times,
                                       std::vector<Eigen::MatrixXd> A_samples,
                                       std::vector<Eigen::VectorXd> B_samples,
                                       std::vector<double> C_samples);

/// Hamiltonian given in ladder-operator form, ordering a_1..a_N, a+_1..a+_N:
///   H = Acal_{mu nu} a^mu a^nu + Bcal_mu a^mu + C
/// with z^mu = Lambda^mu_nu a^nu for an arbitrary positive parameter lambda.
struct LadderRepresentation {
  Eigen::Index n_modes = 1;
  double lambda = 1.0;
  Eigen::MatrixXcd calA;
  Eigen::VectorXcd calB;
  double C = 0.0;
};

/// The closed-form change-of-basis matrix Lambda, blocks
///   [[ sqrt(1/2L) 1,  sqrt(1/2L) 1 ], [ -i sqrt(L/2) 1,  i sqrt(L/2) 1 ]].
Eigen::MatrixXcd ladder_map(Eigen::Index n_modes, double lambda);

struct LadderConversion {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  double C = 0.0;
};

/// Inverts the projection Acal = Lambda^T A Lambda, Bcal = Lambda^T B.
/// Rejects inputs whose reconstructed (A, B) is not real symmetric or whose
/// re-projection fails to reproduce (Acal, Bcal) to 1e-10.
LadderConversion convert_ladder(const LadderRepresentation& rep);

/// convert_ladder wrapped as a constant-in-time schedule.
HamiltonianSchedule from_ladder(const LadderRepresentation& rep, double t_begin, double t_end);

/// Forward projection (A, B) -> (Acal, Bcal); right inverse of convert_ladder.
std::pair<Eigen::MatrixXcd, Eigen::VectorXcd> to_ladder(const Eigen::MatrixXd& A,
                                                        const Eigen::VectorXd& B, double lambda);

}  // namespace paraosc
