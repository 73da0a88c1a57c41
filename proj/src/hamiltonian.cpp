#include "paraosc/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include "paraosc/tolerances.hpp"

namespace paraosc {

namespace {

// Parameter-map reader that rejects typos and leftovers.
class ParamReader {
 public:
  ParamReader(std::string preset, const std::map<std::string, double>& params)
      : preset_(std::move(preset)), params_(params) {}

  double require(const std::string& key) {
    auto it = params_.find(key);
    if (it == params_.end())
      throw ConfigError("preset " + preset_ + ": missing parameter '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  double optional(const std::string& key, double fallback) {
    auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    used_.insert(key);
    return it->second;
  }

  bool has(const std::string& key) const { return params_.count(key) != 0; }

  void finish() const {
    for (const auto& [key, value] : params_) {
      (void)value;
      if (!used_.count(key))
        throw ConfigError("preset " + preset_ + ": unknown parameter '" + key + "'");
    }
  }

 private:
  std::string preset_;
  const std::map<std::string, double>& params_;
  std::set<std::string> used_;
};

double positive_frequency(const std::string& preset, const std::string& key, double value) {
  if (!(value > 0.0))
    throw ConfigError("preset " + preset + ": " + key + " must be > 0, got " +
                      std::to_string(value));
  return value;
}

// A for N uncoupled modes: diag(w_i^2/2, ..., 1/2, ...).
Eigen::MatrixXd sho_matrix(const Eigen::VectorXd& omegas) {
  const Eigen::Index n = omegas.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, i) = omegas[i] * omegas[i] / 2.0;
    A(n + i, n + i) = 0.5;
  }
  return A;
}

HamiltonianSchedule constant_schedule(Eigen::Index n_modes, double t0, double t1,
                                      Eigen::MatrixXd A, Eigen::VectorXd B, double C,
                                      std::string label) {
  auto eval = [A = std::move(A), B = std::move(B), C](double, Side) {
    return Coefficients{A, B, C};
  };
  return HamiltonianSchedule(n_modes, t0, t1, std::move(eval), {}, std::move(label));
}

}  // namespace

HamiltonianSchedule::HamiltonianSchedule(Eigen::Index n_modes, double t_begin, double t_end,
                                         EvalFn eval, std::vector<double> breakpoints,
                                         std::string label, bool tabulated)
    : n_modes_(n_modes),
      t_begin_(t_begin),
      t_end_(t_end),
      eval_(std::move(eval)),
      breakpoints_(std::move(breakpoints)),
      label_(std::move(label)),
      tabulated_(tabulated) {
  if (n_modes_ < 1) throw ConfigError("HamiltonianSchedule: n_modes must be >= 1");
  if (!(t_end_ > t_begin_))
    throw ConfigError("HamiltonianSchedule: require t_end > t_begin, got [" +
                      std::to_string(t_begin_) + ", " + std::to_string(t_end_) + "]");
  if (!eval_) throw ConfigError("HamiltonianSchedule: empty evaluation function");
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
}

Coefficients HamiltonianSchedule::at(double t, Side side) const {
  const double slack = 1e-9 * std::max({1.0, std::abs(t_begin_), std::abs(t_end_)});
  if (t < t_begin_ - slack || t > t_end_ + slack)
    throw std::out_of_range("HamiltonianSchedule: t=" + std::to_string(t) +
                            " outside domain [" + std::to_string(t_begin_) + ", " +
                            std::to_string(t_end_) + "]");
  Coefficients c = eval_(t, side);
  const Eigen::Index d = 2 * n_modes_;
  if (c.A.rows() != d || c.A.cols() != d || c.B.size() != d)
    throw SolverError("HamiltonianSchedule: evaluation returned wrong dimensions");
  return c;
}

HamiltonianSchedule preset(const std::string& name, const std::map<std::string, double>& params,
                           double t_begin, double t_end) {
  if (!(t_end > t_begin))
    throw ConfigError("preset " + name + ": require t1 > t0, got [" + std::to_string(t_begin) +
                      ", " + std::to_string(t_end) + "]");
  ParamReader p(name, params);

  if (name == "constant_sho") {
    std::vector<double> ws;
    ws.push_back(positive_frequency(name, "omega", p.require("omega")));
    for (int k = 2; p.has("omega" + std::to_string(k)); ++k)
      ws.push_back(positive_frequency(name, "omega" + std::to_string(k),
                                      p.optional("omega" + std::to_string(k), 0.0)));
    p.finish();
    Eigen::VectorXd omegas = Eigen::Map<Eigen::VectorXd>(ws.data(), ws.size());
    const Eigen::Index n = omegas.size();
    return constant_schedule(n, t_begin, t_end, sho_matrix(omegas),
                             Eigen::VectorXd::Zero(2 * n), 0.0, name);
  }

  if (name == "driven_sho") {
    const double omega = positive_frequency(name, "omega", p.require("omega"));
    const double f = p.require("f");
    p.finish();
    Eigen::VectorXd omegas(1);
    omegas << omega;
    Eigen::VectorXd B = Eigen::VectorXd::Zero(2);
    B(0) = -f;  // -f q_1
    return constant_schedule(1, t_begin, t_end, sho_matrix(omegas), B, 0.0, name);
  }

  if (name == "parametric_ramp") {
    const double w0 = positive_frequency(name, "omega0", p.require("omega0"));
    const double w1 = positive_frequency(name, "omega1", p.require("omega1"));
    const double r0 = p.optional("ramp_start", t_begin);
    const double r1 = p.optional("ramp_end", t_end);
    p.finish();
    if (!(r1 > r0)) throw ConfigError("preset parametric_ramp: require ramp_end > ramp_start");
    const double w0sq = w0 * w0, w1sq = w1 * w1;
    auto eval = [w0sq, w1sq, r0, r1](double t, Side) {
      double s = (t - r0) / (r1 - r0);
      s = std::clamp(s, 0.0, 1.0);
      const double wsq = w0sq + (w1sq - w0sq) * s;
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
      A(0, 0) = wsq / 2.0;
      A(1, 1) = 0.5;
      return Coefficients{A, Eigen::VectorXd::Zero(2), 0.0};
    };
    std::vector<double> kinks;
    if (r0 > t_begin && r0 < t_end) kinks.push_back(r0);
    if (r1 > t_begin && r1 < t_end) kinks.push_back(r1);
    return HamiltonianSchedule(1, t_begin, t_end, std::move(eval), std::move(kinks), name);
  }

  if (name == "sudden_jump") {
    const double w0 = positive_frequency(name, "omega0", p.require("omega0"));
    const double w1 = positive_frequency(name, "omega1", p.require("omega1"));
    const double tj = p.optional("t_jump", 0.5 * (t_begin + t_end));
    p.finish();
    if (!(tj > t_begin && tj < t_end))
      throw ConfigError("preset sudden_jump: t_jump must lie inside (t0, t1)");
    auto eval = [w0, w1, tj](double t, Side side) {
      const bool before = t < tj || (t == tj && side == Side::Left);
      const double w = before ? w0 : w1;
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
      A(0, 0) = w * w / 2.0;
      A(1, 1) = 0.5;
      return Coefficients{A, Eigen::VectorXd::Zero(2), 0.0};
    };
    return HamiltonianSchedule(1, t_begin, t_end, std::move(eval), {tj}, name);
  }

  if (name == "coupled_pair_qq" || name == "coupled_pair_pp" || name == "coupled_qp") {
    const double w1 = positive_frequency(name, "omega1", p.require("omega1"));
    const double w2 = positive_frequency(name, "omega2", p.require("omega2"));
    const double g = p.require("g");
    p.finish();
    Eigen::VectorXd omegas(2);
    omegas << w1, w2;
    Eigen::MatrixXd A = sho_matrix(omegas);
    if (name == "coupled_pair_qq") {
      A(0, 1) = A(1, 0) = g / 2.0;  // g q_1 q_2
    } else if (name == "coupled_pair_pp") {
      A(2, 3) = A(3, 2) = g / 2.0;  // g p_1 p_2
    } else {
      A(0, 3) = A(3, 0) = g / 2.0;  // g q_1 p_2
    }
    return constant_schedule(2, t_begin, t_end, std::move(A), Eigen::VectorXd::Zero(4), 0.0,
                             name);
  }

  throw ConfigError("preset: unknown preset '" + name + "'");
}

HamiltonianSchedule tabulated_schedule(Eigen::Index n_modes, std::vector<double> times,
                                       std::vector<Eigen::MatrixXd> A_samples,
                                       std::vector<Eigen::VectorXd> B_samples,
                                       std::vector<double> C_samples) {
  const Eigen::Index d = 2 * n_modes;
  if (times.size() < 2) throw ConfigError("tabulated_schedule: need at least two sample times");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw ConfigError("tabulated_schedule: sample times must be strictly increasing");
  if (A_samples.size() != times.size() || B_samples.size() != times.size() ||
      C_samples.size() != times.size())
    throw ConfigError("tabulated_schedule: sample counts must match the time grid");

  double worst_asym = 0.0;
  double worst_asym_t = times.front();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (A_samples[k].rows() != d || A_samples[k].cols() != d || B_samples[k].size() != d)
      throw ConfigError("tabulated_schedule: sample " + std::to_string(k) +
                        " has wrong dimensions for n_modes=" + std::to_string(n_modes));
    if (!A_samples[k].allFinite() || !B_samples[k].allFinite() || !std::isfinite(C_samples[k]))
      throw ConfigError("tabulated_schedule: non-finite entry in sample " + std::to_string(k));
    const double asym = (A_samples[k] - A_samples[k].transpose()).cwiseAbs().maxCoeff();
    if (asym > tol::symmetry_abort)
      throw ConfigError("tabulated_schedule: A sample at t=" + std::to_string(times[k]) +
                        " has symmetry defect " + std::to_string(asym) + " > 1e-6");
    if (asym > worst_asym) {
      worst_asym = asym;
      worst_asym_t = times[k];
    }
    A_samples[k] = 0.5 * (A_samples[k] + A_samples[k].transpose().eval());
  }
  if (worst_asym > tol::symmetry_warn)
    std::cerr << "paraosc: warning: nonsymmetric A table symmetrized, worst defect "
              << worst_asym << " at t=" << worst_asym_t << "\n";

  struct Table {
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> A;
    std::vector<Eigen::VectorXd> B;
    std::vector<double> C;
  };
  auto table = std::make_shared<const Table>(Table{std::move(times), std::move(A_samples),
                                                   std::move(B_samples), std::move(C_samples)});
  const double t0 = table->times.front();
  const double t1 = table->times.back();

  auto eval = [table](double t, Side) {
    const auto& ts = table->times;
    auto hi = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t i1 = static_cast<std::size_t>(hi - ts.begin());
    if (i1 == 0) i1 = 1;
    if (i1 == ts.size()) i1 = ts.size() - 1;
    const std::size_t i0 = i1 - 1;
    if (t == ts[i0]) return Coefficients{table->A[i0], table->B[i0], table->C[i0]};
    if (t == ts[i1]) return Coefficients{table->A[i1], table->B[i1], table->C[i1]};
    const double s = (t - ts[i0]) / (ts[i1] - ts[i0]);
    return Coefficients{table->A[i0] + s * (table->A[i1] - table->A[i0]),
                        table->B[i0] + s * (table->B[i1] - table->B[i0]),
                        table->C[i0] + s * (table->C[i1] - table->C[i0])};
  };
  return HamiltonianSchedule(n_modes, t0, t1, std::move(eval), {}, "table", true);
}

Eigen::MatrixXcd ladder_map(Eigen::Index n_modes, double lambda) {
  if (n_modes < 1) throw ConfigError("ladder_map: n_modes must be >= 1");
  if (!(lambda > 0.0)) throw ConfigError("ladder_map: lambda must be > 0");
  const Eigen::Index n = n_modes;
  const double c1 = 1.0 / std::sqrt(2.0 * lambda);
  const double c2 = std::sqrt(lambda / 2.0);
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    L(i, i) = Complex(c1, 0);
    L(i, n + i) = Complex(c1, 0);
    L(n + i, i) = Complex(0, -c2);  // (1/i) sqrt(lambda/2)
    L(n + i, n + i) = Complex(0, c2);
  }
  return L;
}

std::pair<Eigen::MatrixXcd, Eigen::VectorXcd> to_ladder(const Eigen::MatrixXd& A,
                                                        const Eigen::VectorXd& B, double lambda) {
  if (A.rows() != A.cols() || A.rows() % 2 != 0 || B.size() != A.rows())
    throw ConfigError("to_ladder: expected a 2N x 2N matrix and matching vector");
  const Eigen::MatrixXcd L = ladder_map(A.rows() / 2, lambda);
  return {L.transpose() * A.cast<Complex>() * L, L.transpose() * B.cast<Complex>()};
}

LadderConversion convert_ladder(const LadderRepresentation& rep) {
  const Eigen::Index n = rep.n_modes;
  if (n < 1) throw ConfigError("convert_ladder: n_modes must be >= 1");
  if (!(rep.lambda > 0.0)) throw ConfigError("convert_ladder: lambda must be > 0");
  const Eigen::Index d = 2 * n;
  if (rep.calA.rows() != d || rep.calA.cols() != d)
    throw ConfigError("convert_ladder: calA must be 2N x 2N");
  if (rep.calB.size() != d) throw ConfigError("convert_ladder: calB must have length 2N");

  // Block form of (Lambda^-1)^T calA Lambda^-1 with the exact constants
  // lambda/2, 1/(2 lambda) and c1*c2 = 1/2; avoids redundant square roots.
  const auto Aaa = rep.calA.topLeftCorner(n, n);
  const auto Aab = rep.calA.topRightCorner(n, n);
  const auto Aba = rep.calA.bottomLeftCorner(n, n);
  const auto Abb = rep.calA.bottomRightCorner(n, n);
  const double half_lambda = rep.lambda / 2.0;
  const double inv_two_lambda = 1.0 / (2.0 * rep.lambda);

  Eigen::MatrixXcd Ac(d, d);
  Ac.topLeftCorner(n, n) = half_lambda * (Aaa + Aab + Aba + Abb);
  Ac.topRightCorner(n, n) = Complex(0, 0.5) * (Aaa - Abb + Aba - Aab);
  Ac.bottomLeftCorner(n, n) = Complex(0, 0.5) * (Aaa - Abb - Aba + Aab);
  Ac.bottomRightCorner(n, n) = -inv_two_lambda * (Aaa - Aab - Aba + Abb);

  const double c1 = 1.0 / std::sqrt(2.0 * rep.lambda);
  const double c2 = std::sqrt(rep.lambda / 2.0);
  const auto Ba = rep.calB.head(n);
  const auto Bb = rep.calB.tail(n);
  Eigen::VectorXcd Bc(d);
  Bc.head(n) = c2 * (Ba + Bb);
  Bc.tail(n) = Complex(0, c1) * (Ba - Bb);

  const double scale = std::max({1.0, rep.calA.cwiseAbs().maxCoeff(),
                                 rep.calB.size() ? rep.calB.cwiseAbs().maxCoeff() : 0.0});
  const double imag_defect =
      std::max(Ac.imag().cwiseAbs().maxCoeff(), Bc.imag().cwiseAbs().maxCoeff());
  if (imag_defect > tol::ladder_real * scale)
    throw ConfigError("convert_ladder: reconstructed (A, B) is not real (defect " +
                      std::to_string(imag_defect) +
                      "); the ladder Hamiltonian is unphysical or needs symmetric ordering");

  Eigen::MatrixXd A = Ac.real();
  const double sym_defect = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (sym_defect > tol::ladder_real * scale)
    throw ConfigError("convert_ladder: reconstructed A is not symmetric (defect " +
                      std::to_string(sym_defect) + ")");
  A = 0.5 * (A + A.transpose().eval());
  Eigen::VectorXd B = Bc.real();

  // Re-project through the forward map and require the input back.
  auto [calA_back, calB_back] = to_ladder(A, B, rep.lambda);
  const double round_trip =
      std::max((calA_back - rep.calA).cwiseAbs().maxCoeff(),
               (calB_back - rep.calB).cwiseAbs().maxCoeff());
  if (round_trip > tol::ladder_roundtrip * scale)
    throw ConfigError("convert_ladder: re-projection mismatch " + std::to_string(round_trip) +
                      "; calA must be symmetric in the ladder ordering");

  return LadderConversion{std::move(A), std::move(B), rep.C};
}

HamiltonianSchedule from_ladder(const LadderRepresentation& rep, double t_begin, double t_end) {
  LadderConversion conv = convert_ladder(rep);
  auto eval = [A = std::move(conv.A), B = std::move(conv.B), C = conv.C](double, Side) {
    return Coefficients{A, B, C};
  };
  return HamiltonianSchedule(rep.n_modes, t_begin, t_end, std::move(eval), {}, "ladder");
}

}  // namespace paraosc
