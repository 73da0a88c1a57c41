#include "paraosc/fock_oracle.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

#include "paraosc/tolerances.hpp"

namespace paraosc {

namespace {

constexpr Eigen::Index kMaxDim = 4096;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Eigen::SparseMatrix<Complex> identity_sparse(Eigen::Index d) {
  Eigen::SparseMatrix<Complex> id(d, d);
  id.setIdentity();
  return id;
}

// op acting on one mode, embedded into the K^N product space.
Eigen::SparseMatrix<Complex> embed(const Eigen::SparseMatrix<Complex>& op, Eigen::Index mode,
                                   Eigen::Index n_modes, Eigen::Index cutoff) {
  Eigen::SparseMatrix<Complex> acc = identity_sparse(1);
  for (Eigen::Index m = 0; m < n_modes; ++m) {
    const Eigen::SparseMatrix<Complex>& factor = (m == mode) ? op : identity_sparse(cutoff);
    acc = Eigen::kroneckerProduct(acc, factor).eval();
  }
  return acc;
}

struct Expectations {
  Eigen::VectorXd mean;      // <z^mu>
  Eigen::MatrixXd cov;       // symmetrized covariance
  double norm_defect = 0.0;  // | <psi|psi> - 1 |
};

Expectations measure(const FockOperators& ops, const Eigen::VectorXcd& psi) {
  const Eigen::Index d = 2 * ops.n_modes;
  std::vector<Eigen::VectorXcd> w(d);
  for (Eigen::Index mu = 0; mu < d; ++mu) w[mu] = ops.z[mu] * psi;
  Expectations e;
  e.mean.resize(d);
  e.cov.resize(d, d);
  for (Eigen::Index mu = 0; mu < d; ++mu) e.mean[mu] = psi.dot(w[mu]).real();
  for (Eigen::Index mu = 0; mu < d; ++mu)
    for (Eigen::Index nu = mu; nu < d; ++nu) {
      const double sym = w[mu].dot(w[nu]).real();
      e.cov(mu, nu) = e.cov(nu, mu) = sym - e.mean[mu] * e.mean[nu];
    }
  e.norm_defect = std::abs(psi.squaredNorm() - 1.0);
  return e;
}

Eigen::VectorXcd initial_state(const FockOperators& ops, const StateSpec& state) {
  const Eigen::Index n = ops.n_modes;
  const Eigen::Index K = ops.cutoff;
  if (state.kind == StateSpec::Kind::Number) {
    if (static_cast<Eigen::Index>(state.n.size()) != n)
      throw std::invalid_argument("oracle: occupation count must match modes");
    Eigen::Index idx = 0;
    for (Eigen::Index m = 0; m < n; ++m) {
      const long nm = state.n[m];
      if (nm < 0) throw std::invalid_argument("oracle: occupations must be >= 0");
      if (nm + 10 > K)
        throw ConfigError("oracle: cutoff " + std::to_string(K) +
                          " leaves less than margin 10 above occupation " + std::to_string(nm));
      idx = idx * K + nm;
    }
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(ops.dim);
    psi[idx] = 1.0;
    return psi;
  }

  if (state.alpha.size() != n)
    throw std::invalid_argument("oracle: amplitude count must match modes");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
  for (Eigen::Index m = 0; m < n; ++m) {
    const Complex a = state.alpha[m];
    Eigen::VectorXcd mode(K);
    mode[0] = std::exp(-0.5 * std::norm(a));
    for (Eigen::Index k = 1; k < K; ++k)
      mode[k] = mode[k - 1] * a / std::sqrt(static_cast<double>(k));
    const double tail = std::abs(1.0 - mode.squaredNorm());
    if (tail > tol::coherent_tail)
      throw ConfigError("oracle: coherent-state tail " + fmt(tail) + " above 1e-8 at cutoff " +
                        std::to_string(K) + "; raise the cutoff");
    psi = Eigen::kroneckerProduct(psi, mode).eval();
  }
  return psi;
}

struct SingleRun {
  MomentReport report;
  double norm_drift = 0.0;
};

SingleRun run_at_cutoff(const HamiltonianSchedule& ham, const StateSpec& state,
                        const ReferenceFrequencies& omegas, Eigen::Index cutoff, double dt_sub,
                        const Eigen::VectorXd& grid) {
  const Eigen::Index n = ham.n_modes();
  const FockOperators ops = build_fock_operators(n, cutoff, omegas.values());
  Eigen::VectorXcd psi = initial_state(ops, state);

  MomentReport rep;
  rep.n_modes = n;
  rep.grid = grid;
  SingleRun run;

  auto assemble = [&](const Coefficients& c) {
    Eigen::SparseMatrix<Complex> H(ops.dim, ops.dim);
    for (Eigen::Index mu = 0; mu < 2 * n; ++mu) {
      for (Eigen::Index nu = 0; nu < 2 * n; ++nu)
        if (c.A(mu, nu) != 0.0) H += Complex(c.A(mu, nu), 0) * ops.zz[mu][nu];
      if (c.B[mu] != 0.0) H += Complex(c.B[mu], 0) * ops.z[mu];
    }
    if (c.C != 0.0) H += Complex(c.C, 0) * identity_sparse(ops.dim);
    Eigen::MatrixXcd Hd(H);
    Hd = (0.5 * (Hd + Hd.adjoint())).eval();
    return Hd;
  };

  auto record = [&](const Eigen::VectorXcd& s) {
    const Expectations e = measure(ops, s);
    run.norm_drift = std::max(run.norm_drift, e.norm_defect);
    if (e.norm_defect > tol::oracle_norm_abort)
      throw SolverError("oracle: state norm drifted by " + fmt(e.norm_defect));
    rep.mean_q.push_back(e.mean.head(n));
    rep.mean_p.push_back(e.mean.tail(n));
    rep.var_q.push_back(e.cov.diagonal().head(n));
    rep.var_p.push_back(e.cov.diagonal().tail(n));
    rep.uncertainty.push_back(
        (rep.var_q.back().array() * rep.var_p.back().array()).sqrt());
    rep.cov.push_back(e.cov);
  };

  record(psi);

  // Cache the step map: piecewise-constant schedules reuse one exponential.
  Eigen::MatrixXcd U;
  Coefficients cached;
  double cached_h = -1.0;
  bool have_cache = false;

  for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
    const double a = grid[k];
    const double len = grid[k + 1] - a;
    const auto substeps =
        dt_sub > 0.0
            ? std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(len / dt_sub - 1e-9)))
            : 1;
    const double h = len / static_cast<double>(substeps);
    for (Eigen::Index j = 0; j < substeps; ++j) {
      const double t_mid = a + (static_cast<double>(j) + 0.5) * h;
      const Coefficients c = ham.at(t_mid, Side::Right);
      const bool reusable = have_cache && cached_h == h && cached.C == c.C &&
                            (cached.A.array() == c.A.array()).all() &&
                            (cached.B.array() == c.B.array()).all();
      if (!reusable) {
        const Eigen::MatrixXcd Hd = assemble(c);
        U = (Complex(0, -h) * Hd).exp();
        cached = c;
        cached_h = h;
        have_cache = true;
      }
      psi = (U * psi).eval();
    }
    record(psi);
  }
  run.report = std::move(rep);
  return run;
}

double report_deviation(const MomentReport& x, const MomentReport& y) {
  double dev = 0.0;
  for (std::size_t k = 0; k < x.mean_q.size(); ++k) {
    dev = std::max(dev, (x.mean_q[k] - y.mean_q[k]).cwiseAbs().maxCoeff());
    dev = std::max(dev, (x.mean_p[k] - y.mean_p[k]).cwiseAbs().maxCoeff());
    dev = std::max(dev, (x.var_q[k] - y.var_q[k]).cwiseAbs().maxCoeff());
    dev = std::max(dev, (x.var_p[k] - y.var_p[k]).cwiseAbs().maxCoeff());
  }
  return dev;
}

}  // namespace

FockOperators build_fock_operators(Eigen::Index n_modes, Eigen::Index cutoff,
                                   const Eigen::VectorXd& omegas) {
  if (n_modes < 1 || n_modes > 2)
    throw ConfigError("fock oracle: n_modes restricted to 1 or 2");
  if (cutoff < 2) throw ConfigError("fock oracle: cutoff must be >= 2");
  if (omegas.size() != n_modes)
    throw ConfigError("fock oracle: reference frequency count must match modes");
  double dim_check = 1.0;
  for (Eigen::Index m = 0; m < n_modes; ++m) dim_check *= static_cast<double>(cutoff);
  if (dim_check > static_cast<double>(kMaxDim))
    throw ConfigError("fock oracle: total dimension " + std::to_string(dim_check) +
                      " exceeds " + std::to_string(kMaxDim));

  FockOperators ops;
  ops.n_modes = n_modes;
  ops.cutoff = cutoff;
  ops.dim = static_cast<Eigen::Index>(dim_check);
  ops.z.resize(2 * n_modes);

  for (Eigen::Index m = 0; m < n_modes; ++m) {
    Eigen::SparseMatrix<Complex> a(cutoff, cutoff);
    std::vector<Eigen::Triplet<Complex>> trips;
    for (Eigen::Index k = 1; k < cutoff; ++k)
      trips.emplace_back(k - 1, k, Complex(std::sqrt(static_cast<double>(k)), 0));
    a.setFromTriplets(trips.begin(), trips.end());
    const Eigen::SparseMatrix<Complex> adag = a.adjoint();
    const double w = omegas[m];
    const Eigen::SparseMatrix<Complex> q =
        ((a + adag) * Complex(1.0 / std::sqrt(2.0 * w), 0)).eval();
    const Eigen::SparseMatrix<Complex> p =
        ((a - adag) * Complex(0, -std::sqrt(w / 2.0))).eval();
    ops.z[m] = embed(q, m, n_modes, cutoff);
    ops.z[n_modes + m] = embed(p, m, n_modes, cutoff);
  }

  ops.zz.resize(2 * n_modes);
  for (Eigen::Index mu = 0; mu < 2 * n_modes; ++mu) {
    ops.zz[mu].resize(2 * n_modes);
    for (Eigen::Index nu = 0; nu < 2 * n_modes; ++nu)
      ops.zz[mu][nu] = (ops.z[mu] * ops.z[nu]).eval();
  }
  return ops;
}

OracleResult oracle_moments(const HamiltonianSchedule& ham, const StateSpec& state,
                            const ReferenceFrequencies& omegas, const FockConfig& cfg,
                            const TimeGridSpec& spec) {
  const double dt_grid = spec.dt > 0.0 ? spec.dt : default_time_step(omegas);
  const Eigen::VectorXd grid = build_time_grid(ham, spec, dt_grid);

  OracleResult result;
  SingleRun main_run = run_at_cutoff(ham, state, omegas, cfg.cutoff, cfg.dt, grid);
  result.norm_drift = main_run.norm_drift;
  if (cfg.estimate_truncation) {
    const SingleRun margin = run_at_cutoff(ham, state, omegas, cfg.cutoff + 10, cfg.dt, grid);
    result.truncation_sensitivity = report_deviation(main_run.report, margin.report);
    if (result.truncation_sensitivity > cfg.certify_tol)
      throw SolverError("oracle: cutoff sensitivity " + fmt(result.truncation_sensitivity) +
                        " above " + fmt(cfg.certify_tol) +
                        "; refusing to certify (raise the cutoff)");
  }
  result.report = std::move(main_run.report);
  return result;
}

}  // namespace paraosc
