#include "paraosc/propagator.hpp"

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

}  // namespace

Eigen::VectorXcd full_drift(const Eigen::VectorXcd& u) {
  Eigen::VectorXcd full(2 * u.size());
  full.head(u.size()) = u;
  full.tail(u.size()) = u.conjugate();
  return full;
}

Propagator build_propagator(const SolutionRecord& rec) {
  if (rec.size() == 0) throw std::invalid_argument("build_propagator: empty record");
  const Eigen::Index n = rec.n_modes;
  const SymplecticForm form = make_symplectic_form(n);

  Propagator prop;
  prop.n_modes = n;
  prop.grid = rec.grid;
  prop.Z.reserve(rec.size());
  prop.d.reserve(rec.size());

  const Eigen::MatrixXcd& V0 = rec.V[0];
  const Eigen::VectorXcd u0 = full_drift(rec.u[0]);

  for (Eigen::Index k = 0; k < rec.size(); ++k) {
    const Eigen::MatrixXcd Vinv = fast_inverse(rec.V[k], form);
    const Eigen::MatrixXcd Zc = Vinv * V0;
    const Eigen::VectorXcd dc = -(Vinv * (full_drift(rec.u[k]) - u0));
    const double imag_res =
        std::max(Zc.imag().cwiseAbs().maxCoeff(), dc.imag().cwiseAbs().maxCoeff());
    prop.max_imag_residual = std::max(prop.max_imag_residual, imag_res);
    if (imag_res > tol::propagator_imag_abort)
      throw SolverError("build_propagator: imaginary residual " + fmt(imag_res) + " at t=" +
                        fmt(rec.grid[k]) + " signals a broken conjugate-block structure");
    prop.Z.push_back(Zc.real());
    prop.d.push_back(dc.real());
    prop.max_symplectic_residual =
        std::max(prop.max_symplectic_residual, symplectic_residual(prop.Z.back(), form));
  }
  return prop;
}

double heisenberg_residual(const Propagator& prop, const HamiltonianSchedule& ham, double t,
                           double dt) {
  const Eigen::Index k = grid_index_of(prop.grid, t);
  if (!(dt > 0.0)) throw std::invalid_argument("heisenberg_residual: dt must be positive");
  const Eigen::Index last = prop.grid.size() - 1;
  const double h_local =
      k < last ? prop.grid[k + 1] - prop.grid[k] : prop.grid[k] - prop.grid[k - 1];
  const auto m = static_cast<Eigen::Index>(std::llround(dt / h_local));
  if (m < 1 || std::abs(static_cast<double>(m) * h_local - dt) > 1e-9 * std::max(1.0, dt))
    throw std::invalid_argument("heisenberg_residual: dt is not a multiple of the grid step");

  // dZ/dt and dd/dt by central differences; one-sided at the grid ends.
  Eigen::MatrixXd dZ;
  Eigen::VectorXd dd;
  if (k - m >= 0 && k + m <= last) {
    const double width = prop.grid[k + m] - prop.grid[k - m];
    dZ = (prop.Z[k + m] - prop.Z[k - m]) / width;
    dd = (prop.d[k + m] - prop.d[k - m]) / width;
  } else if (k + 2 * m <= last) {
    const double width = prop.grid[k + m] - prop.grid[k];
    dZ = (-3.0 * prop.Z[k] + 4.0 * prop.Z[k + m] - prop.Z[k + 2 * m]) / (2.0 * width);
    dd = (-3.0 * prop.d[k] + 4.0 * prop.d[k + m] - prop.d[k + 2 * m]) / (2.0 * width);
  } else if (k - 2 * m >= 0) {
    const double width = prop.grid[k] - prop.grid[k - m];
    dZ = (3.0 * prop.Z[k] - 4.0 * prop.Z[k - m] + prop.Z[k - 2 * m]) / (2.0 * width);
    dd = (3.0 * prop.d[k] - 4.0 * prop.d[k - m] + prop.d[k - 2 * m]) / (2.0 * width);
  } else {
    throw std::invalid_argument("heisenberg_residual: grid too short for the probe step");
  }

  const SymplecticForm form = make_symplectic_form(prop.n_modes);
  const Coefficients c = ham.at(prop.grid[k], Side::Right);
  const Eigen::MatrixXd M = 2.0 * (form.upper * c.A);
  const Eigen::VectorXd epsB = form.upper * c.B;
  const double res_Z = (dZ - M * prop.Z[k]).cwiseAbs().maxCoeff();
  const double res_d = (dd - M * prop.d[k] - epsB).cwiseAbs().maxCoeff();
  return std::max(res_Z, res_d);
}

Eigen::MatrixXd QpReconstruction::folded_map() const {
  const Eigen::Index n = q_on_q0.rows();
  Eigen::MatrixXd Z(2 * n, 2 * n);
  Z.topLeftCorner(n, n) = 2.0 * q_on_q0.real();
  Z.topRightCorner(n, n) = 2.0 * q_on_p0.real();
  Z.bottomLeftCorner(n, n) = 2.0 * p_on_q0.real();
  Z.bottomRightCorner(n, n) = 2.0 * p_on_p0.real();
  return Z;
}

Eigen::VectorXd QpReconstruction::folded_shift() const {
  const Eigen::Index n = q_scalar.size();
  Eigen::VectorXd d(2 * n);
  d.head(n) = 2.0 * q_scalar.real();
  d.tail(n) = 2.0 * p_scalar.real();
  return d;
}

QpReconstruction reconstruct_qp(const PrimaryInvariantSet& inv, double t) {
  const Eigen::Index n = inv.n_modes;
  const Eigen::Index k = grid_index_of(inv.grid, t);

  // V^-1 blocks: phi = i V_br^T, pi = -i V_bl^T.
  auto phi_of = [n](const Eigen::MatrixXcd& V) {
    return Eigen::MatrixXcd(Complex(0, 1) * V.bottomRightCorner(n, n).transpose());
  };
  auto pi_of = [n](const Eigen::MatrixXcd& V) {
    return Eigen::MatrixXcd(Complex(0, -1) * V.bottomLeftCorner(n, n).transpose());
  };
  const Eigen::MatrixXcd phi_t = phi_of(inv.V[k]);
  const Eigen::MatrixXcd pi_t = pi_of(inv.V[k]);
  const Eigen::MatrixXcd phi0_conj = phi_of(inv.V[0]).conjugate();
  const Eigen::MatrixXcd pi0_conj = pi_of(inv.V[0]).conjugate();
  const Eigen::VectorXcd du = inv.u[k] - inv.u[0];

  QpReconstruction rc;
  rc.q_on_q0 = Complex(0, -1) * (phi_t * pi0_conj);
  rc.q_on_p0 = Complex(0, 1) * (phi_t * phi0_conj);
  rc.q_scalar = -(phi_t * du);
  rc.p_on_q0 = Complex(0, -1) * (pi_t * pi0_conj);
  rc.p_on_p0 = Complex(0, 1) * (pi_t * phi0_conj);
  rc.p_scalar = -(pi_t * du);
  return rc;
}

}  // namespace paraosc
