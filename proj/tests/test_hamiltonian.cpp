#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "paraosc/hamiltonian.hpp"

using namespace paraosc;

TEST_CASE("constant_sho preset is H = (p^2 + w^2 q^2)/2") {
  const auto ham = preset("constant_sho", {{"omega", 1.0}}, 0.0, 10.0);
  CHECK(ham.n_modes() == 1);
  const Coefficients c = ham.at(3.7);
  CHECK(c.A(0, 0) == 0.5);
  CHECK(c.A(1, 1) == 0.5);
  CHECK(c.A(0, 1) == 0.0);
  CHECK(c.B.isZero(0.0));
  CHECK(c.C == 0.0);

  const auto two = preset("constant_sho", {{"omega", 1.0}, {"omega2", 3.0}}, 0.0, 1.0);
  CHECK(two.n_modes() == 2);
  CHECK(two.at(0.5).A(1, 1) == 4.5);
}

TEST_CASE("driven_sho carries the force in B") {
  const auto ham = preset("driven_sho", {{"omega", 1.0}, {"f", 1.0}}, 0.0, 10.0);
  const Coefficients c = ham.at(0.0);
  CHECK(c.B(0) == -1.0);  // -f q term
  CHECK(c.B(1) == 0.0);
  CHECK(c.A(0, 0) == 0.5);
}

TEST_CASE("coupled presets place g/2 in the right block") {
  const std::map<std::string, double> params{{"omega1", 1.0}, {"omega2", 2.0}, {"g", 0.3}};
  const Coefficients qq = preset("coupled_pair_qq", params, 0.0, 1.0).at(0.5);
  CHECK(qq.A(0, 1) == 0.15);
  CHECK(qq.A(1, 0) == 0.15);
  CHECK(qq.A(2, 3) == 0.0);
  CHECK((qq.A - qq.A.transpose()).cwiseAbs().maxCoeff() == 0.0);

  const Coefficients pp = preset("coupled_pair_pp", params, 0.0, 1.0).at(0.5);
  CHECK(pp.A(2, 3) == 0.15);
  CHECK(pp.A(0, 1) == 0.0);

  const Coefficients qp = preset("coupled_qp", params, 0.0, 1.0).at(0.5);
  CHECK(qp.A(0, 3) == 0.15);  // g q_1 p_2
  CHECK(qp.A(3, 0) == 0.15);
  CHECK(qp.A(0, 1) == 0.0);
}

TEST_CASE("parametric_ramp interpolates omega^2 and reports kinks") {
  const auto ham = preset("parametric_ramp",
                          {{"omega0", 1.0}, {"omega1", 2.0}, {"ramp_start", 2.0},
                           {"ramp_end", 6.0}},
                          0.0, 10.0);
  CHECK(ham.at(0.0).A(0, 0) == 0.5);
  CHECK(ham.at(1.9).A(0, 0) == 0.5);
  CHECK(ham.at(10.0).A(0, 0) == 2.0);
  CHECK(ham.at(4.0).A(0, 0) == doctest::Approx(0.5 * 2.5).epsilon(1e-15));  // midway in w^2
  REQUIRE(ham.breakpoints().size() == 2);
  CHECK(ham.breakpoints()[0] == 2.0);
  CHECK(ham.breakpoints()[1] == 6.0);
}

TEST_CASE("sudden_jump honors one-sided evaluation at the jump") {
  const auto ham =
      preset("sudden_jump", {{"omega0", 1.0}, {"omega1", 2.0}, {"t_jump", 5.0}}, 0.0, 10.0);
  CHECK(ham.at(4.999).A(0, 0) == 0.5);
  CHECK(ham.at(5.001).A(0, 0) == 2.0);
  CHECK(ham.at(5.0, Side::Left).A(0, 0) == 0.5);
  CHECK(ham.at(5.0, Side::Right).A(0, 0) == 2.0);
  REQUIRE(ham.breakpoints().size() == 1);
  CHECK(ham.breakpoints()[0] == 5.0);
}

TEST_CASE("every preset stays symmetric on a 1000-point grid") {
  const std::map<std::string, double> pair{{"omega1", 1.0}, {"omega2", 2.0}, {"g", 0.4}};
  const std::vector<HamiltonianSchedule> schedules = {
      preset("constant_sho", {{"omega", 1.3}}, 0.0, 10.0),
      preset("driven_sho", {{"omega", 1.0}, {"f", 0.7}}, 0.0, 10.0),
      preset("parametric_ramp", {{"omega0", 1.0}, {"omega1", 2.0}}, 0.0, 10.0),
      preset("sudden_jump", {{"omega0", 1.0}, {"omega1", 2.0}}, 0.0, 10.0),
      preset("coupled_pair_qq", pair, 0.0, 10.0),
      preset("coupled_pair_pp", pair, 0.0, 10.0),
      preset("coupled_qp", pair, 0.0, 10.0),
  };
  for (const auto& ham : schedules) {
    for (int k = 0; k < 1000; ++k) {
      const double t = 10.0 * k / 999.0;
      const Coefficients c = ham.at(t);
      CHECK((c.A - c.A.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(c.A.allFinite());
    }
  }
}

TEST_CASE("schedules are pure functions of t") {
  const auto ham =
      preset("parametric_ramp", {{"omega0", 1.0}, {"omega1", 2.0}}, 0.0, 10.0);
  for (double t : {0.0, 1.234567, 9.99}) {
    const Coefficients a = ham.at(t);
    const Coefficients b = ham.at(t);
    CHECK((a.A.array() == b.A.array()).all());
    CHECK((a.B.array() == b.B.array()).all());
    CHECK(a.C == b.C);
  }
}

TEST_CASE("preset rejects bad input") {
  CHECK_THROWS_AS(preset("no_such_preset", {}, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(preset("constant_sho", {{"omega", 0.0}}, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(preset("constant_sho", {{"omega", -2.0}}, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(preset("constant_sho", {{"omega", 1.0}}, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(preset("constant_sho", {{"omega", 1.0}, {"typo", 3.0}}, 0.0, 1.0),
                  ConfigError);
  CHECK_THROWS_AS(preset("driven_sho", {{"omega", 1.0}}, 0.0, 1.0), ConfigError);

  const auto ham = preset("constant_sho", {{"omega", 1.0}}, 0.0, 1.0);
  CHECK_THROWS_AS(ham.at(2.0), std::out_of_range);
}

TEST_CASE("tabulated schedules interpolate linearly and symmetrize") {
  const Eigen::MatrixXd A0 = (Eigen::MatrixXd(2, 2) << 0.5, 0.0, 0.0, 0.5).finished();
  const Eigen::MatrixXd A1 = (Eigen::MatrixXd(2, 2) << 2.0, 0.0, 0.0, 0.5).finished();
  const auto ham = tabulated_schedule(
      1, {0.0, 4.0}, {A0, A1}, {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)},
      {0.0, 1.0});
  CHECK(ham.tabulated());
  CHECK(ham.at(0.0).A(0, 0) == 0.5);
  CHECK(ham.at(4.0).A(0, 0) == 2.0);
  CHECK(ham.at(2.0).A(0, 0) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(ham.at(2.0).C == doctest::Approx(0.5).epsilon(1e-15));

  // small asymmetry symmetrized, large asymmetry rejected
  Eigen::MatrixXd tilted = A0;
  tilted(0, 1) = 1e-9;
  const auto soft = tabulated_schedule(
      1, {0.0, 1.0}, {tilted, A1}, {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)},
      {0.0, 0.0});
  const Eigen::MatrixXd sym = soft.at(0.0).A;
  CHECK((sym - sym.transpose()).cwiseAbs().maxCoeff() == 0.0);

  tilted(0, 1) = 1e-3;
  CHECK_THROWS_AS(
      tabulated_schedule(1, {0.0, 1.0}, {tilted, A1},
                         {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)}, {0.0, 0.0}),
      ConfigError);
  CHECK_THROWS_AS(
      tabulated_schedule(1, {0.0, 0.0}, {A0, A1},
                         {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)}, {0.0, 0.0}),
      ConfigError);
}

TEST_CASE("ladder map matches its closed form") {
  const Eigen::MatrixXcd L = ladder_map(1, 2.0);
  CHECK(L(0, 0) == Complex(0.5, 0.0));  // 1/sqrt(2 lambda) with lambda = 2
  CHECK(L(0, 1) == Complex(0.5, 0.0));
  CHECK(L(1, 0) == Complex(0.0, -1.0));  // (1/i) sqrt(lambda/2)
  CHECK(L(1, 1) == Complex(0.0, 1.0));
  CHECK_THROWS_AS(ladder_map(1, 0.0), ConfigError);
  CHECK_THROWS_AS(ladder_map(1, -1.0), ConfigError);
}

TEST_CASE("symmetrized number Hamiltonian converts to the matched oscillator") {
  // H = w (a+ a + 1/2) symmetrized: calA off-diagonal w/2, lambda = w.
  const double w = 1.0;
  LadderRepresentation rep;
  rep.n_modes = 1;
  rep.lambda = w;
  rep.calA = Eigen::MatrixXcd::Zero(2, 2);
  rep.calA(0, 1) = rep.calA(1, 0) = Complex(w / 2.0, 0);
  rep.calB = Eigen::VectorXcd::Zero(2);
  const LadderConversion conv = convert_ladder(rep);
  CHECK(conv.A(0, 0) == 0.5);  // w^2/2, bitwise for clean inputs
  CHECK(conv.A(1, 1) == 0.5);
  CHECK(conv.A(0, 1) == 0.0);
  CHECK(conv.B.isZero(0.0));
  CHECK(conv.C == 0.0);
}

TEST_CASE("linear ladder term converts to B = beta (sqrt(2), 0)") {
  const double beta = 0.7;
  LadderRepresentation rep;
  rep.n_modes = 1;
  rep.lambda = 1.0;
  rep.calA = Eigen::MatrixXcd::Zero(2, 2);
  rep.calB = Eigen::VectorXcd::Zero(2);
  rep.calB(0) = rep.calB(1) = Complex(beta, 0);
  const LadderConversion conv = convert_ladder(rep);
  CHECK(std::abs(conv.B(0) - beta * std::sqrt(2.0)) <= 1e-15);
  CHECK(conv.B(1) == 0.0);
  CHECK(conv.A.isZero(0.0));
}

TEST_CASE("ladder round trips: forward then back is the identity") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::uniform_real_distribution<double> lam(0.2, 3.0);
  for (Eigen::Index n : {1, 2}) {
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd A(2 * n, 2 * n);
      for (Eigen::Index i = 0; i < 2 * n; ++i)
        for (Eigen::Index j = 0; j < 2 * n; ++j) A(i, j) = dist(rng);
      A = (0.5 * (A + A.transpose())).eval();
      Eigen::VectorXd B(2 * n);
      for (Eigen::Index i = 0; i < 2 * n; ++i) B[i] = dist(rng);
      const double lambda = lam(rng);

      // (A, B) -> (calA, calB) -> (A', B')
      const auto [calA, calB] = to_ladder(A, B, lambda);
      LadderRepresentation rep;
      rep.n_modes = n;
      rep.lambda = lambda;
      rep.calA = calA;
      rep.calB = calB;
      const LadderConversion back = convert_ladder(rep);
      CHECK((back.A - A).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((back.B - B).cwiseAbs().maxCoeff() <= 1e-10);

      // and re-projecting reproduces calA, calB
      const auto [calA2, calB2] = to_ladder(back.A, back.B, lambda);
      CHECK((calA2 - calA).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((calB2 - calB).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("convert_ladder rejects unphysical or unsymmetrized input") {
  LadderRepresentation rep;
  rep.n_modes = 1;
  rep.lambda = 1.0;
  rep.calB = Eigen::VectorXcd::Zero(2);

  // H = a a alone is not hermitian
  rep.calA = Eigen::MatrixXcd::Zero(2, 2);
  rep.calA(0, 0) = 1.0;
  CHECK_THROWS_AS(convert_ladder(rep), ConfigError);

  // unsymmetrized a+ a ordering leaks an imaginary cross block
  rep.calA = Eigen::MatrixXcd::Zero(2, 2);
  rep.calA(1, 0) = 1.0;
  CHECK_THROWS_AS(convert_ladder(rep), ConfigError);

  rep.calA = Eigen::MatrixXcd::Zero(2, 2);
  rep.lambda = -1.0;
  CHECK_THROWS_AS(convert_ladder(rep), ConfigError);
}

TEST_CASE("lambda defaults to one") {
  const LadderRepresentation rep;
  CHECK(rep.lambda == 1.0);
}
