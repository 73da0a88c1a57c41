#include "paraosc/moments.hpp"

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

MomentReport build_report(const SolutionRecord& rec, const Eigen::VectorXd& weights,
                          const Eigen::VectorXcd& alpha) {
  const Eigen::Index n = rec.n_modes;
  MomentReport rep;
  rep.n_modes = n;
  rep.grid = rec.grid;
  rep.mean_q.reserve(rec.size());
  rep.mean_p.reserve(rec.size());
  rep.var_q.reserve(rec.size());
  rep.var_p.reserve(rec.size());
  rep.cov.reserve(rec.size());
  rep.uncertainty.reserve(rec.size());

  const Eigen::VectorXcd weights_c = weights.cast<Complex>();

  for (Eigen::Index k = 0; k < rec.size(); ++k) {
    const Eigen::MatrixXcd& phi = rec.phi[k];
    const Eigen::MatrixXcd& pi = rec.pi[k];

    Eigen::MatrixXcd W(2 * n, n);
    W.topRows(n) = phi;
    W.bottomRows(n) = pi;
    const Eigen::MatrixXcd covc = W * weights_c.asDiagonal() * W.adjoint();
    Eigen::MatrixXd cov = covc.real();

    const Eigen::VectorXcd centered = alpha - rec.u[k];
    const Eigen::VectorXd mq = 2.0 * (phi * centered).real();
    const Eigen::VectorXd mp = 2.0 * (pi * centered).real();

    const Eigen::VectorXd vq = cov.diagonal().head(n);
    const Eigen::VectorXd vp = cov.diagonal().tail(n);
    Eigen::VectorXd products(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      products[i] = std::sqrt(vq[i] * vp[i]);
      if (products[i] < 0.5 - tol::heisenberg_bound_slack)
        throw SolverError("state moments: uncertainty product " + fmt(products[i]) +
                          " below the Heisenberg bound at t=" + fmt(rec.grid[k]));
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov,
                                                            Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::covariance_psd_slack)
      throw SolverError("state moments: covariance not positive semidefinite at t=" +
                        fmt(rec.grid[k]));

    rep.mean_q.push_back(mq);
    rep.mean_p.push_back(mp);
    rep.var_q.push_back(vq);
    rep.var_p.push_back(vp);
    rep.cov.push_back(std::move(cov));
    rep.uncertainty.push_back(std::move(products));
  }
  return rep;
}

}  // namespace

StateSpec StateSpec::number(std::vector<long> occupations) {
  StateSpec s;
  s.kind = Kind::Number;
  s.n = std::move(occupations);
  return s;
}

StateSpec StateSpec::coherent(Eigen::VectorXcd amplitudes) {
  StateSpec s;
  s.kind = Kind::Coherent;
  s.alpha = std::move(amplitudes);
  return s;
}

MomentReport number_state_moments(const SolutionRecord& rec, const std::vector<long>& n) {
  if (static_cast<Eigen::Index>(n.size()) != rec.n_modes)
    throw std::invalid_argument("number_state_moments: occupation count must match modes");
  Eigen::VectorXd weights(rec.n_modes);
  for (Eigen::Index i = 0; i < rec.n_modes; ++i) {
    if (n[i] < 0)
      throw std::invalid_argument("number_state_moments: occupations must be >= 0");
    weights[i] = 2.0 * static_cast<double>(n[i]) + 1.0;
  }
  return build_report(rec, weights, Eigen::VectorXcd::Zero(rec.n_modes));
}

MomentReport coherent_state_moments(const SolutionRecord& rec, const Eigen::VectorXcd& alpha) {
  if (alpha.size() != rec.n_modes)
    throw std::invalid_argument("coherent_state_moments: amplitude count must match modes");
  if (!alpha.allFinite())
    throw std::invalid_argument("coherent_state_moments: amplitudes must be finite");
  return build_report(rec, Eigen::VectorXd::Ones(rec.n_modes), alpha);
}

MomentReport state_moments(const SolutionRecord& rec, const StateSpec& state) {
  return state.kind == StateSpec::Kind::Number ? number_state_moments(rec, state.n)
                                               : coherent_state_moments(rec, state.alpha);
}

std::vector<Eigen::VectorXd> uncertainty_products(const MomentReport& report) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(report.var_q.size());
  for (std::size_t k = 0; k < report.var_q.size(); ++k)
    out.push_back((report.var_q[k].array() * report.var_p[k].array()).sqrt());
  return out;
}

Eigen::VectorXd coherent_initial_point(const Eigen::VectorXcd& alpha,
                                       const Eigen::VectorXd& omegas) {
  if (alpha.size() != omegas.size())
    throw std::invalid_argument("coherent_initial_point: size mismatch");
  const Eigen::Index n = alpha.size();
  Eigen::VectorXd z0(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = omegas[i];
    z0[i] = (alpha[i] + std::conj(alpha[i])).real() / std::sqrt(2.0 * w);
    z0[n + i] = (Complex(0, -1) * std::sqrt(w / 2.0) * (alpha[i] - std::conj(alpha[i]))).real();
  }
  return z0;
}

}  // namespace paraosc
