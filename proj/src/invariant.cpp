#include "paraosc/invariant.hpp"

#include <cmath>
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

// Resolve (t, dt) to a grid index and a stride; both must be grid-aligned.
struct Stencil {
  Eigen::Index k = 0;
  Eigen::Index m = 0;
  double half_width = 0.0;
};

Stencil central_stencil(const Eigen::VectorXd& grid, double t, double dt) {
  const Eigen::Index k = grid_index_of(grid, t);
  if (!(dt > 0.0)) throw std::invalid_argument("residual probe: dt must be positive");
  const double h = k + 1 < grid.size() ? grid[k + 1] - grid[k] : grid[k] - grid[k - 1];
  const auto m = static_cast<Eigen::Index>(std::llround(dt / h));
  if (m < 1 || std::abs(static_cast<double>(m) * h - dt) > 1e-9 * std::max(1.0, dt))
    throw std::invalid_argument("residual probe: dt=" + fmt(dt) +
                                " is not a multiple of the grid step " + fmt(h));
  if (k - m < 0 || k + m >= grid.size())
    throw std::invalid_argument("residual probe: t=" + fmt(t) + " +- dt=" + fmt(dt) +
                                " leaves the grid");
  return Stencil{k, m, 0.5 * (grid[k + m] - grid[k - m])};
}

}  // namespace

PrimaryInvariantSet build_primary(const SolutionRecord& rec) {
  if (rec.size() == 0) throw std::invalid_argument("build_primary: empty record");
  const Eigen::Index n = rec.n_modes;
  const SymplecticForm form = make_symplectic_form(n);

  PrimaryInvariantSet inv;
  inv.n_modes = n;
  inv.grid = rec.grid;
  inv.V = rec.V;
  inv.u = rec.u;
  inv.omegas = rec.omegas;

  for (Eigen::Index k = 0; k < rec.size(); ++k) {
    const double res_i =
        (rec.V[k].bottomRows(n) - rec.V[k].topRows(n).conjugate()).cwiseAbs().maxCoeff();
    const double res_ii = canonical_residual(rec.V[k], form);
    inv.max_condition_i_residual = std::max(inv.max_condition_i_residual, res_i);
    inv.max_condition_ii_residual = std::max(inv.max_condition_ii_residual, res_ii);
    if (res_i > tol::condition_abort || res_ii > tol::condition_abort)
      throw SolverError("build_primary: condition " +
                        std::string(res_i > tol::condition_abort ? "(i)" : "(ii)") +
                        " residual " + fmt(std::max(res_i, res_ii)) + " at t=" +
                        fmt(rec.grid[k]) + " exceeds 1e-6");
  }
  return inv;
}

Eigen::MatrixXcd fast_inverse(const Eigen::MatrixXcd& V, const SymplecticForm& form) {
  const double res = canonical_residual(V, form);
  if (res > tol::condition_abort)
    throw std::invalid_argument("fast_inverse: condition (ii) residual " + fmt(res) +
                                " exceeds 1e-6; Eq-16 form only inverts canonical V");
  const Eigen::MatrixXcd eps = form.upper.cast<Complex>();
  return Complex(0, 1) * eps * V.transpose() * eps.transpose();
}

QuadraticInvariant lr_invariant(const PrimaryInvariantSet& inv) {
  const Eigen::Index n = inv.n_modes;
  const Eigen::Index d = 2 * n;
  const SymplecticForm form = make_symplectic_form(n);
  const Eigen::MatrixXcd eps = form.upper.cast<Complex>();

  QuadraticInvariant quad;
  quad.n_modes = n;
  quad.grid = inv.grid;
  quad.omegas = inv.omegas;
  quad.G.reserve(inv.grid.size());
  quad.g.reserve(inv.grid.size());
  quad.c.reserve(inv.grid.size());

  for (Eigen::Index k = 0; k < inv.grid.size(); ++k) {
    Eigen::MatrixXcd Gc = Eigen::MatrixXcd::Zero(d, d);
    Eigen::VectorXcd gc = Eigen::VectorXcd::Zero(d);
    Complex cc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = inv.omegas[i];
      const Eigen::RowVectorXcd v = inv.V[k].row(i);
      const Eigen::RowVectorXcd vdag = inv.V[k].row(n + i);  // = conj(v) for valid sets
      const Complex ui = inv.u[k][i];
      const Complex ui_dag = std::conj(ui);
      Gc += (0.5 * w) * (vdag.transpose() * v + v.transpose() * vdag);
      gc += w * (ui * vdag.transpose() + ui_dag * v.transpose());
      // reordering a^mu a^nu -> symmetric form leaves (i/2) vdag eps v^T
      const Complex comm = (vdag * eps * v.transpose())(0, 0);
      cc += w * (ui_dag * ui + Complex(0, 0.5) * comm + 0.5);
    }
    const double imag_res = std::max({Gc.imag().cwiseAbs().maxCoeff(),
                                      gc.imag().cwiseAbs().maxCoeff(), std::abs(cc.imag())});
    quad.max_imag_residual = std::max(quad.max_imag_residual, imag_res);
    if (imag_res > tol::lr_imag_abort)
      throw SolverError("lr_invariant: imaginary residual " + fmt(imag_res) + " at t=" +
                        fmt(inv.grid[k]) + " signals an inconsistent invariant set");
    quad.G.push_back(Gc.real());
    quad.g.push_back(gc.real());
    quad.c.push_back(cc.real());
  }
  return quad;
}

double lr_eigenvalue(const Eigen::VectorXd& omegas, const std::vector<long>& n) {
  if (static_cast<Eigen::Index>(n.size()) != omegas.size())
    throw std::invalid_argument("lr_eigenvalue: occupation count must match mode count");
  double e = 0.0;
  for (Eigen::Index i = 0; i < omegas.size(); ++i) {
    if (n[i] < 0) throw std::invalid_argument("lr_eigenvalue: occupations must be >= 0");
    e += omegas[i] * (static_cast<double>(n[i]) + 0.5);
  }
  return e;
}

double invariant_residual(const PrimaryInvariantSet& inv, const HamiltonianSchedule& ham,
                          double t, double dt) {
  const Stencil st = central_stencil(inv.grid, t, dt);
  const Eigen::Index n = inv.n_modes;
  const SymplecticForm form = make_symplectic_form(n);
  const Coefficients c = ham.at(inv.grid[st.k], Side::Right);
  const Eigen::MatrixXcd epsA = (form.upper * c.A).cast<Complex>();
  const Eigen::VectorXcd epsB = (form.upper * c.B).cast<Complex>();

  const Eigen::MatrixXcd dV =
      (inv.V[st.k + st.m] - inv.V[st.k - st.m]) / (2.0 * st.half_width);
  const double res_v = (dV + 2.0 * inv.V[st.k] * epsA).cwiseAbs().maxCoeff();

  const Eigen::VectorXcd du =
      (inv.u[st.k + st.m] - inv.u[st.k - st.m]) / (2.0 * st.half_width);
  const double res_u =
      (du + inv.V[st.k].topRows(n) * epsB).cwiseAbs().maxCoeff();
  return std::max(res_v, res_u);
}

double invariant_residual(const QuadraticInvariant& quad, const HamiltonianSchedule& ham,
                          double t, double dt) {
  const Stencil st = central_stencil(quad.grid, t, dt);
  const SymplecticForm form = make_symplectic_form(quad.n_modes);
  const Coefficients co = ham.at(quad.grid[st.k], Side::Right);
  const Eigen::MatrixXd epsA = form.upper * co.A;
  const Eigen::MatrixXd Aeps = co.A * form.upper;
  const Eigen::VectorXd epsB = form.upper * co.B;
  const Eigen::MatrixXd& G = quad.G[st.k];
  const Eigen::VectorXd& g = quad.g[st.k];

  const Eigen::MatrixXd dG = (quad.G[st.k + st.m] - quad.G[st.k - st.m]) / (2.0 * st.half_width);
  const double res_G = (dG - 2.0 * Aeps * G + 2.0 * G * epsA).cwiseAbs().maxCoeff();

  const Eigen::VectorXd dg = (quad.g[st.k + st.m] - quad.g[st.k - st.m]) / (2.0 * st.half_width);
  const double res_g = (dg - 2.0 * Aeps * g + 2.0 * G * epsB).cwiseAbs().maxCoeff();

  const double dc = (quad.c[st.k + st.m] - quad.c[st.k - st.m]) / (2.0 * st.half_width);
  const double res_c = std::abs(dc + g.dot(epsB));
  return std::max({res_G, res_g, res_c});
}

}  // namespace paraosc
