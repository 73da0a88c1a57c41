#include <doctest.h>

#include "oracles.hpp"
#include "paraosc/fock_oracle.hpp"

using namespace paraosc;
using oracles::pi;

namespace {

ReferenceFrequencies omega1(double w = 1.0) {
  Eigen::VectorXd o(1);
  o << w;
  return ReferenceFrequencies(o);
}

}  // namespace

TEST_CASE("truncated commutator defect sits on the boundary rows") {
  for (Eigen::Index n : {Eigen::Index(1), Eigen::Index(2)}) {
    const Eigen::Index K = n == 1 ? 12 : 5;
    const Eigen::VectorXd omegas = Eigen::VectorXd::Constant(n, 1.3);
    const FockOperators ops = build_fock_operators(n, K, omegas);
    // occupation of `mode` inside a flat product-space index (mode 0 outermost)
    auto occupation = [&](Eigen::Index flat, Eigen::Index mode) {
      for (Eigen::Index m = n - 1; m > mode; --m) flat /= K;
      return flat % K;
    };
    for (Eigen::Index mode = 0; mode < n; ++mode) {
      const Eigen::MatrixXcd comm =
          Eigen::MatrixXcd(ops.z[mode] * ops.z[n + mode] - ops.z[n + mode] * ops.z[mode]) -
          Complex(0, 1) * Eigen::MatrixXcd::Identity(ops.dim, ops.dim);
      double off_boundary = 0.0;
      double on_boundary = 0.0;
      for (Eigen::Index r = 0; r < ops.dim; ++r)
        for (Eigen::Index c = 0; c < ops.dim; ++c) {
          const bool boundary =
              occupation(r, mode) == K - 1 || occupation(c, mode) == K - 1;
          (boundary ? on_boundary : off_boundary) =
              std::max(boundary ? on_boundary : off_boundary, std::abs(comm(r, c)));
        }
      CHECK(off_boundary <= 1e-12);
      CHECK(on_boundary >= 1.0);  // the truncation artifact is large and localized
    }
  }
}

TEST_CASE("stationary ground state keeps its variance") {
  const auto ham = preset("constant_sho", {{"omega", 1.0}}, 0.0, 2.0 * pi);
  FockConfig cfg;
  cfg.cutoff = 24;
  const OracleResult res =
      oracle_moments(ham, StateSpec::number({0}), omega1(), cfg, {0.0, 2.0 * pi, 0.02});
  CHECK(res.norm_drift <= 1e-8);
  CHECK(res.truncation_sensitivity >= 0.0);
  CHECK(res.truncation_sensitivity <= 1e-10);
  for (const auto& vq : res.report.var_q) CHECK(std::abs(vq(0) - 0.5) <= 1e-8);
  for (const auto& mq : res.report.mean_q) CHECK(std::abs(mq(0)) <= 1e-10);
}

TEST_CASE("driven vacuum reaches the classical displacement") {
  const auto ham = preset("driven_sho", {{"omega", 1.0}, {"f", 1.0}}, 0.0, pi);
  FockConfig cfg;
  cfg.cutoff = 40;
  cfg.dt = 1e-3;
  const OracleResult res = oracle_moments(ham, StateSpec::coherent(Eigen::VectorXcd::Zero(1)),
                                          omega1(), cfg, {0.0, pi, 0.01});
  CHECK(std::abs(res.report.mean_q.back()(0) - 2.0) <= 1e-4);
  CHECK(std::abs(res.report.mean_p.back()(0)) <= 1e-4);
}

TEST_CASE("sudden jump matches the invariant-method variances") {
  const auto ham = preset("sudden_jump", {{"omega0", 1.0}, {"omega1", 2.0}}, 0.0, 4.0 * pi);
  const TimeGridSpec grid{0.0, 4.0 * pi, 0.02};
  const SolutionRecord rec = integrate_solution(ham, omega1(), grid);
  const MomentReport invariant_rep = number_state_moments(rec, {0});

  FockConfig cfg;
  cfg.cutoff = 40;
  const OracleResult res = oracle_moments(ham, StateSpec::number({0}), omega1(), cfg, grid);
  REQUIRE(res.report.grid.size() == rec.grid.size());
  double dev = 0.0;
  for (Eigen::Index k = 0; k < rec.size(); ++k) {
    dev = std::max(dev, std::abs(res.report.var_q[k](0) - invariant_rep.var_q[k](0)));
    dev = std::max(dev, std::abs(res.report.var_p[k](0) - invariant_rep.var_p[k](0)));
  }
  CHECK(dev <= 1e-4);
}

TEST_CASE("two coupled modes agree with the invariant method at a small cutoff") {
  const std::map<std::string, double> pair{{"omega1", 1.0}, {"omega2", 2.0}, {"g", 0.3}};
  const auto ham = preset("coupled_pair_qq", pair, 0.0, 4.0);
  const ReferenceFrequencies omegas((Eigen::VectorXd(2) << 1.0, 2.0).finished());
  const TimeGridSpec grid{0.0, 4.0, 0.02};
  const SolutionRecord rec = integrate_solution(ham, omegas, grid);
  const MomentReport invariant_rep = number_state_moments(rec, {0, 0});

  FockConfig cfg;
  cfg.cutoff = 16;
  const OracleResult res = oracle_moments(ham, StateSpec::number({0, 0}), omegas, cfg, grid);
  double dev = 0.0;
  for (Eigen::Index k = 0; k < rec.size(); ++k) {
    dev = std::max(dev, (res.report.var_q[k] - invariant_rep.var_q[k]).cwiseAbs().maxCoeff());
    dev = std::max(dev, (res.report.var_p[k] - invariant_rep.var_p[k]).cwiseAbs().maxCoeff());
    dev = std::max(dev,
                   (res.report.mean_q[k] - invariant_rep.mean_q[k]).cwiseAbs().maxCoeff());
  }
  CHECK(dev <= 2e-4);
}

TEST_CASE("oracle rejects unsupported configurations") {
  const Eigen::VectorXd o3 = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(build_fock_operators(3, 8, o3), ConfigError);
  const Eigen::VectorXd o2 = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(build_fock_operators(2, 70, o2), ConfigError);  // 4900 > 4096

  const auto ham = preset("constant_sho", {{"omega", 1.0}}, 0.0, 1.0);
  FockConfig cfg;
  cfg.cutoff = 12;
  // occupation too close to the cutoff (margin 10)
  CHECK_THROWS_AS(oracle_moments(ham, StateSpec::number({5}), omega1(), cfg, {0.0, 1.0, 0.1}),
                  ConfigError);
  // coherent tail above 1e-8 at a small cutoff
  Eigen::VectorXcd big(1);
  big << Complex(2.0, 0.0);
  cfg.cutoff = 14;
  cfg.estimate_truncation = false;
  CHECK_THROWS_AS(oracle_moments(ham, StateSpec::coherent(big), omega1(), cfg, {0.0, 1.0, 0.1}),
                  ConfigError);
}

TEST_CASE("oracle refuses to certify when the cutoff is too tight") {
  const auto ham = preset("sudden_jump", {{"omega0", 1.0}, {"omega1", 3.0}}, 0.0, 6.0);
  FockConfig cfg;
  cfg.cutoff = 12;
  cfg.certify_tol = 1e-15;  // any genuine truncation sensitivity trips this
  CHECK_THROWS_WITH_AS(
      oracle_moments(ham, StateSpec::number({0}), omega1(), cfg, {0.0, 6.0, 0.05}),
      doctest::Contains("refusing to certify"), SolverError);
}
