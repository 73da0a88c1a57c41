#include "paraosc/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "paraosc/tolerances.hpp"

namespace paraosc {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_domain(const HamiltonianSchedule& ham, const TimeGridSpec& spec) {
  const double slack = 1e-9 * std::max({1.0, std::abs(spec.t0), std::abs(spec.t1)});
  if (spec.t0 < ham.t_begin() - slack || spec.t1 > ham.t_end() + slack)
    throw ConfigError("time grid [" + fmt(spec.t0) + ", " + fmt(spec.t1) +
                      "] is not covered by the schedule domain [" + fmt(ham.t_begin()) + ", " +
                      fmt(ham.t_end()) + "]");
}

}  // namespace

ReferenceFrequencies::ReferenceFrequencies(Eigen::VectorXd omegas) : omegas_(std::move(omegas)) {
  if (omegas_.size() < 1)
    throw ConfigError("ReferenceFrequencies: need at least one frequency");
  for (Eigen::Index i = 0; i < omegas_.size(); ++i)
    if (!(omegas_[i] > 0.0) || !std::isfinite(omegas_[i]))
      throw ConfigError("ReferenceFrequencies: omega_" + std::to_string(i + 1) +
                        " must be positive and finite");
}

double default_time_step(const ReferenceFrequencies& omegas) {
  return (2.0 * std::numbers::pi / omegas.values().maxCoeff()) / 1000.0;
}

Eigen::VectorXd build_time_grid(const HamiltonianSchedule& ham, const TimeGridSpec& spec,
                                double dt) {
  if (!(spec.t1 > spec.t0))
    throw ConfigError("time grid: require t1 > t0");
  if (!(dt > 0.0)) throw ConfigError("time grid: require dt > 0");
  check_domain(ham, spec);

  const double span = spec.t1 - spec.t0;
  std::vector<double> bounds{spec.t0};
  for (double b : ham.breakpoints())
    if (b > spec.t0 + 1e-12 * span && b < spec.t1 - 1e-12 * span) bounds.push_back(b);
  bounds.push_back(spec.t1);

  std::vector<double> times;
  times.push_back(spec.t0);
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const double a = bounds[s];
    const double b = bounds[s + 1];
    const double len = b - a;
    const auto n = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(
                                                 std::ceil(len / dt - 1e-9)));
    const double h = len / static_cast<double>(n);
    for (Eigen::Index j = 1; j <= n; ++j)
      times.push_back(j == n ? b : a + static_cast<double>(j) * h);
  }
  return Eigen::Map<Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size()));
}

Eigen::Index grid_index_of(const Eigen::VectorXd& grid, double t) {
  if (grid.size() == 0) throw std::invalid_argument("grid_index_of: empty grid");
  const double* begin = grid.data();
  const double* end = begin + grid.size();
  const double* it = std::lower_bound(begin, end, t);
  Eigen::Index k = it - begin;
  if (k == grid.size()) k = grid.size() - 1;
  if (k > 0 && std::abs(grid[k - 1] - t) < std::abs(grid[k] - t)) --k;
  const double span = grid[grid.size() - 1] - grid[0];
  if (std::abs(grid[k] - t) > 1e-9 * std::max(1.0, std::abs(span)))
    throw std::invalid_argument("t=" + std::to_string(t) + " is not a grid point");
  return k;
}

Eigen::Index SolutionRecord::index_of(double t) const { return grid_index_of(grid, t); }

std::optional<ReferenceFrequencies> default_reference_frequencies(
    const HamiltonianSchedule& ham) {
  const Eigen::Index n = ham.n_modes();
  const Coefficients c = ham.at(ham.t_begin(), Side::Right);
  const auto qq = c.A.topLeftCorner(n, n);
  const auto pp = c.A.bottomRightCorner(n, n);
  const auto qp = c.A.topRightCorner(n, n);
  auto off_diagonal_free = [n](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && m(i, j) != 0.0) return false;
    return true;
  };
  if (!off_diagonal_free(qq) || !off_diagonal_free(pp) || !qp.isZero(0.0)) return std::nullopt;
  Eigen::VectorXd omegas(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double prod = qq(i, i) * pp(i, i);
    if (!(prod > 0.0)) return std::nullopt;
    omegas[i] = 2.0 * std::sqrt(prod);
  }
  return ReferenceFrequencies(std::move(omegas));
}

namespace {

// Right multiplier R(t) = -2 eps A(t) and drift source w(t) = eps B(t) at one
// RK4 stage, cast once to complex.
struct Stage {
  Eigen::MatrixXcd R;
  Eigen::VectorXcd w;
};

Stage make_stage(const HamiltonianSchedule& ham, const Eigen::MatrixXd& eps, double t,
                 Side side) {
  const Coefficients c = ham.at(t, side);
  Stage s;
  s.R = (-2.0 * (eps * c.A)).cast<Complex>();
  s.w = (eps * c.B).cast<Complex>();
  return s;
}

}  // namespace

SolutionRecord integrate_solution(const HamiltonianSchedule& ham,
                                  const ReferenceFrequencies& omegas,
                                  const TimeGridSpec& spec) {
  const Eigen::Index n = ham.n_modes();
  if (omegas.size() != n)
    throw ConfigError("integrate_solution: got " + std::to_string(omegas.size()) +
                      " reference frequencies for " + std::to_string(n) + " modes");
  const double dt = spec.dt > 0.0 ? spec.dt : default_time_step(omegas);
  const Eigen::VectorXd grid = build_time_grid(ham, spec, dt);
  const SymplecticForm form = make_symplectic_form(n);

  SolutionRecord rec;
  rec.n_modes = n;
  rec.grid = grid;
  rec.omegas = omegas.values();
  rec.V.reserve(grid.size());
  rec.phi.reserve(grid.size());
  rec.pi.reserve(grid.size());
  rec.u.reserve(grid.size());

  // V(t0) = i [[-pi*, phi*], [pi, -phi]] with phi = diag(1/sqrt(2 w)),
  // pi = diag(-i sqrt(w/2)); built entrywise so the blocks are exact.
  Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = rec.omegas[i];
    const double root_w_half = std::sqrt(w / 2.0);
    const double root_inv_2w = 1.0 / std::sqrt(2.0 * w);
    V(i, i) = Complex(root_w_half, 0.0);
    V(i, n + i) = Complex(0.0, root_inv_2w);
    V(n + i, i) = Complex(root_w_half, 0.0);
    V(n + i, n + i) = Complex(0.0, -root_inv_2w);
  }
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);

  auto store = [&](const Eigen::MatrixXcd& Vk, const Eigen::VectorXcd& uk) {
    rec.V.push_back(Vk);
    // phi, pi are the V^-1 blocks (coefficients of b in q, p). In terms of
    // the conjugate-structured V they are i V_br^T and -i V_bl^T; the
    // transpose matters once q-p coupling makes the blocks nonsymmetric.
    rec.phi.push_back(Complex(0, 1) * Vk.bottomRightCorner(n, n).transpose());
    rec.pi.push_back(Complex(0, -1) * Vk.bottomLeftCorner(n, n).transpose());
    rec.u.push_back(uk);
    const double conj_res =
        (Vk.bottomRows(n) - Vk.topRows(n).conjugate()).cwiseAbs().maxCoeff();
    rec.max_conjugacy_residual = std::max(rec.max_conjugacy_residual, conj_res);
  };

  auto monitor = [&](const Eigen::MatrixXcd& Vk, const Eigen::VectorXcd& uk, double t,
                     double h) {
    if (!Vk.allFinite() || !uk.allFinite())
      throw SolverError("integrate_solution: non-finite state at t=" + fmt(t));
    const double res = canonical_residual(Vk, form);
    rec.max_canonical_residual = std::max(rec.max_canonical_residual, res);
    if (res > tol::canonical_abort)
      throw SolverError("integrate_solution: canonical residual " + fmt(res) + " at t=" +
                        fmt(t) + " exceeds 1e-6; reduce the time step (dt=" + fmt(h) + ")");
  };

  monitor(V, u, grid[0], dt);
  store(V, u);

  for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
    const double a = grid[k];
    const double b = grid[k + 1];
    const double h = b - a;
    const Stage s1 = make_stage(ham, form.upper, a, Side::Right);
    const Stage s2 = make_stage(ham, form.upper, a + 0.5 * h, Side::Right);
    const Stage s4 = make_stage(ham, form.upper, b, Side::Left);

    const Eigen::MatrixXcd k1V = V * s1.R;
    const Eigen::VectorXcd k1u = -(V.topRows(n) * s1.w);
    const Eigen::MatrixXcd V2 = V + (0.5 * h) * k1V;
    const Eigen::MatrixXcd k2V = V2 * s2.R;
    const Eigen::VectorXcd k2u = -(V2.topRows(n) * s2.w);
    const Eigen::MatrixXcd V3 = V + (0.5 * h) * k2V;
    const Eigen::MatrixXcd k3V = V3 * s2.R;
    const Eigen::VectorXcd k3u = -(V3.topRows(n) * s2.w);
    const Eigen::MatrixXcd V4 = V + h * k3V;
    const Eigen::MatrixXcd k4V = V4 * s4.R;
    const Eigen::VectorXcd k4u = -(V4.topRows(n) * s4.w);

    V += (h / 6.0) * (k1V + 2.0 * k2V + 2.0 * k3V + k4V);
    u += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);

    monitor(V, u, b, h);
    store(V, u);
  }
  return rec;
}

ClassicalTrajectory integrate_classical(const HamiltonianSchedule& ham,
                                        const Eigen::VectorXd& z0, const TimeGridSpec& spec) {
  const Eigen::Index n = ham.n_modes();
  if (z0.size() != 2 * n)
    throw ConfigError("integrate_classical: z0 must have length 2N");
  if (!(spec.dt > 0.0))
    throw ConfigError("integrate_classical: dt must be positive");
  const Eigen::VectorXd grid = build_time_grid(ham, spec, spec.dt);
  const SymplecticForm form = make_symplectic_form(n);

  // dz/dt = 2 eps A z + eps B: the lowered-index Hamilton equation composed
  // with index raising.
  auto rhs = [&](const Eigen::VectorXd& z, double t, Side side) {
    const Coefficients c = ham.at(t, side);
    return Eigen::VectorXd(2.0 * (form.upper * (c.A * z)) + form.upper * c.B);
  };

  ClassicalTrajectory traj;
  traj.grid = grid;
  traj.z.reserve(grid.size());
  Eigen::VectorXd z = z0;
  traj.z.push_back(z);
  for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
    const double a = grid[k];
    const double b = grid[k + 1];
    const double h = b - a;
    const Eigen::VectorXd k1 = rhs(z, a, Side::Right);
    const Eigen::VectorXd k2 = rhs(z + (0.5 * h) * k1, a + 0.5 * h, Side::Right);
    const Eigen::VectorXd k3 = rhs(z + (0.5 * h) * k2, a + 0.5 * h, Side::Right);
    const Eigen::VectorXd k4 = rhs(z + h * k3, b, Side::Left);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite())
      throw SolverError("integrate_classical: non-finite state at t=" + fmt(b));
    traj.z.push_back(z);
  }
  return traj;
}

}  // namespace paraosc
