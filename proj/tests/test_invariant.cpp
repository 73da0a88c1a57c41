#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "paraosc/invariant.hpp"
#include "paraosc/moments.hpp"

using namespace paraosc;
using oracles::pi;

namespace {

ReferenceFrequencies omega1(double w = 1.0) {
  Eigen::VectorXd o(1);
  o << w;
  return ReferenceFrequencies(o);
}

SolutionRecord sho_record(double w, double T, double dt) {
  const auto ham = preset("constant_sho", {{"omega", w}}, 0.0, T);
  return integrate_solution(ham, omega1(w), {0.0, T, dt});
}

}  // namespace

TEST_CASE("primary invariants at t0 are the standard ladder coefficients") {
  const SolutionRecord rec = sho_record(1.0, 1.0, 1e-3);
  const PrimaryInvariantSet inv = build_primary(rec);
  // b(0) = (q + i p)/sqrt(2): coefficients (1/sqrt(2), i/sqrt(2))
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(inv.V[0](0, 0) - Complex(r, 0)) <= 1e-15);
  CHECK(std::abs(inv.V[0](0, 1) - Complex(0, r)) <= 1e-15);
  CHECK(inv.u[0](0) == Complex(0, 0));
}

TEST_CASE("commutator matrix equals the symplectic form on the whole grid") {
  const auto ham = preset("driven_sho", {{"omega", 1.0}, {"f", 1.0}}, 0.0, 4.0 * pi);
  const SolutionRecord rec = integrate_solution(ham, omega1(), {0.0, 4.0 * pi, 0.0});
  const PrimaryInvariantSet inv = build_primary(rec);
  CHECK(inv.max_condition_ii_residual <= 1e-8);
  CHECK(inv.max_condition_i_residual <= 1e-9);

  const SymplecticForm form = make_symplectic_form(1);
  const Eigen::MatrixXcd eps = form.upper.cast<Complex>();
  for (Eigen::Index k = 0; k < inv.grid.size(); k += 500) {
    const Eigen::MatrixXcd comm = Complex(0, 1) * inv.V[k] * eps * inv.V[k].transpose();
    CHECK((comm - eps).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("constant oscillator rows rotate with e^{i w t}") {
  const SolutionRecord rec = sho_record(1.0, 2.0 * pi, 1e-3);
  const PrimaryInvariantSet inv = build_primary(rec);
  for (Eigen::Index k = 0; k < rec.size(); k += 701) {
    const Eigen::RowVector2cd expected =
        std::exp(Complex(0, rec.grid[k])) * inv.V[0].row(0);
    CHECK((inv.V[k].row(0) - expected).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("build_primary rejects broken records and names the time") {
  SolutionRecord rec = sho_record(1.0, 1.0, 1e-3);
  rec.V[500](0, 0) += Complex(1e-3, 0);
  CHECK_THROWS_WITH_AS(build_primary(rec), doctest::Contains("condition"), SolverError);
}

TEST_CASE("fast inverse matches the frozen t0 value and the LU oracle") {
  const SymplecticForm form = make_symplectic_form(1);
  const SolutionRecord rec = sho_record(1.0, 2.0 * pi, 1e-3);

  // V(0)^-1 = [[1/sqrt2, 1/sqrt2], [-i/sqrt2, i/sqrt2]]
  const Eigen::MatrixXcd inv0 = fast_inverse(rec.V[0], form);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(inv0(0, 0) - Complex(r, 0)) <= 1e-15);
  CHECK(std::abs(inv0(0, 1) - Complex(r, 0)) <= 1e-15);
  CHECK(std::abs(inv0(1, 0) - Complex(0, -r)) <= 1e-15);
  CHECK(std::abs(inv0(1, 1) - Complex(0, r)) <= 1e-15);

  for (Eigen::Index k = 0; k < rec.size(); k += 97) {
    const Eigen::MatrixXcd fast = fast_inverse(rec.V[k], form);
    CHECK((rec.V[k] * fast - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);
    // general-purpose dense inversion as oracle
    const Eigen::MatrixXcd lu = rec.V[k].inverse();
    CHECK((fast - lu).cwiseAbs().maxCoeff() <= 1e-8);
    // block layout [[phi, phi*], [pi, pi*]]
    CHECK(std::abs(fast(0, 0) - rec.phi[k](0, 0)) <= 1e-12);
    CHECK(std::abs(fast(1, 0) - rec.pi[k](0, 0)) <= 1e-12);
    CHECK(std::abs(fast(0, 1) - std::conj(rec.phi[k](0, 0))) <= 1e-12);
    CHECK(std::abs(fast(1, 1) - std::conj(rec.pi[k](0, 0))) <= 1e-12);
  }
}

TEST_CASE("fast inverse rejects non-canonical input") {
  const SymplecticForm form = make_symplectic_form(1);
  const SolutionRecord rec = sho_record(1.0, 1.0, 1e-2);
  CHECK_THROWS_AS(fast_inverse((2.0 * rec.V[0]).eval(), form), std::invalid_argument);
}

TEST_CASE("LR invariant of the matched oscillator is H/omega") {
  const SolutionRecord rec = sho_record(1.0, 2.0 * pi, 1e-3);
  const QuadraticInvariant quad = lr_invariant(build_primary(rec));
  CHECK(quad.max_imag_residual <= 1e-10);
  for (Eigen::Index k = 0; k < rec.size(); k += 500) {
    CHECK(std::abs(quad.G[k](0, 0) - 0.5) <= 1e-10);
    CHECK(std::abs(quad.G[k](1, 1) - 0.5) <= 1e-10);
    CHECK(std::abs(quad.G[k](0, 1)) <= 1e-10);
    CHECK(quad.g[k].cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(quad.c[k]) <= 1e-10);
  }
}

TEST_CASE("B = 0 keeps the drift and the linear part at zero") {
  const std::map<std::string, double> pair{{"omega1", 1.0}, {"omega2", 2.0}, {"g", 0.3}};
  const auto ham = preset("coupled_pair_qq", pair, 0.0, 4.0 * pi);
  const ReferenceFrequencies omegas((Eigen::VectorXd(2) << 1.0, 2.0).finished());
  const SolutionRecord rec = integrate_solution(ham, omegas, {0.0, 4.0 * pi, 0.0});
  for (Eigen::Index k = 0; k < rec.size(); k += 400) CHECK(rec.u[k].isZero(0.0));
  const QuadraticInvariant quad = lr_invariant(build_primary(rec));
  for (Eigen::Index k = 0; k < rec.size(); k += 400) {
    CHECK(quad.g[k].isZero(0.0));
    // c carries (i/2)[b, b+] + 1/2, zero only up to integrator drift
    CHECK(std::abs(quad.c[k]) <= 1e-10);
  }
}

TEST_CASE("vacuum expectation of the invariant stays at sum omega/2") {
  const auto ham = preset("driven_sho", {{"omega", 1.0}, {"f", 1.0}}, 0.0, 2.0 * pi);
  const SolutionRecord rec = integrate_solution(ham, omega1(), {0.0, 2.0 * pi, 0.0});
  const QuadraticInvariant quad = lr_invariant(build_primary(rec));
  const MomentReport rep = number_state_moments(rec, {0});
  const double expected = lr_eigenvalue(rec.omegas, {0});
  CHECK(expected == 0.5);
  for (Eigen::Index k = 0; k < rec.size(); k += 200) {
    // <I> = sum G (cov + m m^T) + g . m + c
    Eigen::VectorXd m(2);
    m << rep.mean_q[k](0), rep.mean_p[k](0);
    const double value =
        (quad.G[k].array() * (rep.cov[k] + m * m.transpose()).array()).sum() +
        quad.g[k].dot(m) + quad.c[k];
    CHECK(std::abs(value - expected) <= 1e-8);
  }
}

TEST_CASE("lr_eigenvalue is exactly constant across the grid") {
  const SolutionRecord rec = sho_record(1.3, 2.0, 1e-3);
  const QuadraticInvariant quad = lr_invariant(build_primary(rec));
  const double e0 = lr_eigenvalue(quad.omegas, {2});
  for (int k = 0; k < 5; ++k) CHECK(lr_eigenvalue(quad.omegas, {2}) == e0);
  CHECK_THROWS_AS(lr_eigenvalue(quad.omegas, {-1}), std::invalid_argument);
  CHECK_THROWS_AS(lr_eigenvalue(quad.omegas, {0, 0}), std::invalid_argument);
}

TEST_CASE("invariance residual is O(dt^2) on the closed-form record") {
  // driven oscillator closed forms, never touching the integrator
  const SolutionRecord rec = oracles::closed_form_record(1.0, 1.0, 2.0, 1e-3);
  const auto ham = preset("driven_sho", {{"omega", 1.0}, {"f", 1.0}}, 0.0, 2.0);
  const PrimaryInvariantSet inv = build_primary(rec);
  CHECK(invariant_residual(inv, ham, 1.0, 1e-3) <= 1e-6);
  CHECK(invariant_residual(inv, ham, 0.5, 1e-3) <= 1e-6);
  // quadratic Taylor decay: quadrupling dt grows the residual ~16x
  const double fine = invariant_residual(inv, ham, 1.0, 1e-3);
  const double coarse = invariant_residual(inv, ham, 1.0, 4e-3);
  CHECK(coarse / fine >= 8.0);
  CHECK(coarse / fine <= 32.0);
}

TEST_CASE("time-independent invariant has a tiny quadratic residual") {
  const SolutionRecord rec = sho_record(1.0, 2.0, 1e-3);
  const auto ham = preset("constant_sho", {{"omega", 1.0}}, 0.0, 2.0);
  const QuadraticInvariant quad = lr_invariant(build_primary(rec));
  CHECK(invariant_residual(quad, ham, 1.0, 1e-3) <= 1e-8);
}

TEST_CASE("perturbed coefficients trip the residual detector") {
  const SolutionRecord rec = oracles::closed_form_record(1.0, 0.0, 2.0, 1e-3);
  PrimaryInvariantSet inv = build_primary(rec);
  const auto ham = preset("constant_sho", {{"omega", 1.0}}, 0.0, 2.0);
  const Eigen::Index k = grid_index_of(inv.grid, 1.0);
  inv.V[k + 1](0, 0) += Complex(1e-3, 0);
  CHECK(invariant_residual(inv, ham, 1.0, 1e-3) >= 0.1);
}

TEST_CASE("residual probes reject off-grid input") {
  const SolutionRecord rec = sho_record(1.0, 1.0, 1e-2);
  const auto ham = preset("constant_sho", {{"omega", 1.0}}, 0.0, 1.0);
  const PrimaryInvariantSet inv = build_primary(rec);
  CHECK_THROWS_AS(invariant_residual(inv, ham, 2.0, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(invariant_residual(inv, ham, 0.0, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(invariant_residual(inv, ham, 0.5, 1e-3), std::invalid_argument);
}

TEST_CASE("lr_invariant flags broken conjugacy") {
  const SolutionRecord rec = sho_record(1.0, 1.0, 1e-2);
  PrimaryInvariantSet inv = build_primary(rec);
  inv.V[50].row(1) *= Complex(1.0, 1e-4);
  CHECK_THROWS_AS(lr_invariant(inv), SolverError);
}
