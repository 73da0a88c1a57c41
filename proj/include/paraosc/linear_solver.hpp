#pragma once

// Fixed-step classical RK4 integration of
//   dV/dt = -2 V eps A(t)        (solution matrix, complex 2N x 2N)
//   du/dt = -(V eps B(t))_i      (drift, annihilation rows i = 1..N)
// from the reference-frequency initial conditions, and of the classical
// Hamilton equations dz/dt = 2 eps A z + eps B.
//
// V and u advance jointly in one augmented system so they stay consistent to
// the same order. There is no adaptive stepping; the canonical residual
// || i V eps V^T - eps ||_max is monitored every step and aborts above 1e-6.

#include <optional>
#include <vector>

#include "paraosc/hamiltonian.hpp"
#include "paraosc/symplectic.hpp"

namespace paraosc {

class ReferenceFrequencies {
 public:
  explicit ReferenceFrequencies(Eigen::VectorXd omegas);
  const Eigen::VectorXd& values() const { return omegas_; }
  Eigen::Index size() const { return omegas_.size(); }

 private:
  Eigen::VectorXd omegas_;
};

/// Grid request. dt <= 0 selects the default step (2 pi / max omega) / 1000.
struct TimeGridSpec {
  double t0 = 0.0;
  double t1 = 1.0;
  double dt = 0.0;
};

double default_time_step(const ReferenceFrequencies& omegas);

/// Strictly increasing times covering [t0, t1], uniform between consecutive
/// schedule breakpoints; t0, t1 and every interior breakpoint land on the
/// grid exactly.
Eigen::VectorXd build_time_grid(const HamiltonianSchedule& ham, const TimeGridSpec& spec,
                                double dt);

struct SolutionRecord {
  Eigen::Index n_modes = 0;
  Eigen::VectorXd grid;
  std::vector<Eigen::MatrixXcd> V;    // rows are the invariant coefficient vectors v^mu
  std::vector<Eigen::MatrixXcd> phi;  // N x N position-like block of V^-1
  std::vector<Eigen::MatrixXcd> pi;   // N x N momentum-like block of V^-1
  std::vector<Eigen::VectorXcd> u;    // drift components u_1..u_N (creation block implied)
  Eigen::VectorXd omegas;
  double max_canonical_residual = 0.0;
  double max_conjugacy_residual = 0.0;

  Eigen::Index size() const { return grid.size(); }
  /// Index of a grid time; rejects times that are not grid points.
  Eigen::Index index_of(double t) const;
};

SolutionRecord integrate_solution(const HamiltonianSchedule& ham,
                                  const ReferenceFrequencies& omegas, const TimeGridSpec& grid);

struct ClassicalTrajectory {
  Eigen::VectorXd grid;
  std::vector<Eigen::VectorXd> z;
};

/// Requires an explicit dt (no reference frequencies to derive one from).
ClassicalTrajectory integrate_classical(const HamiltonianSchedule& ham,
                                        const Eigen::VectorXd& z0, const TimeGridSpec& grid);

/// Reference frequencies implied by A(t0) when it is diagonal in both blocks
/// with no q-p cross coupling: omega_i = 2 sqrt(A_qq,ii A_pp,ii).
std::optional<ReferenceFrequencies> default_reference_frequencies(const HamiltonianSchedule& ham);

/// Nearest grid index for t, or an error when t is not a grid point.
Eigen::Index grid_index_of(const Eigen::VectorXd& grid, double t);

}  // namespace paraosc
