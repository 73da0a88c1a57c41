#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "paraosc/csv.hpp"
#include "paraosc/scenario.hpp"

using namespace paraosc;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("paraosc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json base_config() {
  json j;
  j["hamiltonian"] = {{"preset", "constant_sho"}, {"params", {{"omega", 1.0}}}};
  j["time"] = {{"t0", 0.0}, {"t1", 6.283185307179586}, {"dt", 0.01}};
  j["outputs"] = {"moments"};
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("run writes a constant variance column for the matched oscillator") {
  const fs::path dir = fresh_dir("run_basic");
  const Scenario sc = parse_scenario(base_config(), "basic");
  RunOptions opt;
  opt.out_dir = dir;
  std::ostringstream log;
  CHECK(run_scenario(sc, opt, log) == 0);

  REQUIRE(fs::exists(dir / "moments.csv"));
  REQUIRE(fs::exists(dir / "manifest.json"));
  REQUIRE(fs::exists(dir / "moments_var_q.svg"));

  std::ifstream csv(dir / "moments.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,mean_q_1,mean_p_1,var_q_1,var_p_1,product_1");
  std::string line;
  Eigen::Index rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    REQUIRE(vals.size() == 6);
    CHECK(std::abs(vals[3] - 0.5) <= 1e-9);  // var_q = 1/(2w)
    CHECK(std::abs(vals[5] - 0.5) <= 1e-9);  // minimum uncertainty
  }
  // one row per grid point
  const json manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("resolved").at("grid_points").get<Eigen::Index>() == rows);
  CHECK(manifest.at("residual_maxima").at("canonical").get<double>() <= 1e-8);
}

TEST_CASE("csv doubles round-trip through 17 significant digits") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1).size() >= 17);  // 17 significant digits
  for (double v : {0.1, 1.0 / 3.0, 6.283185307179586, -1.2345678901234567e-100, 0.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("malformed configs name the offending field") {
  json j = base_config();
  j["time"].erase("dt");
  CHECK_THROWS_WITH_AS(parse_scenario(j, "bad"), doctest::Contains("time.dt"), ConfigError);

  j = base_config();
  j["hamiltonian"] = {{"preset", "unknown_thing"}};
  const Scenario sc = parse_scenario(j, "bad2");
  RunOptions opt;
  opt.out_dir = fresh_dir("bad2");
  std::ostringstream log;
  CHECK_THROWS_AS(run_scenario(sc, opt, log), ConfigError);

  j = base_config();
  j["outputs"] = {"wat"};
  CHECK_THROWS_WITH_AS(parse_scenario(j, "bad3"), doctest::Contains("outputs"), ConfigError);

  j = base_config();
  j["typo_field"] = 1;
  CHECK_THROWS_WITH_AS(parse_scenario(j, "bad4"), doctest::Contains("typo_field"),
                       ConfigError);

  j = base_config();
  j["time"]["dt"] = -1.0;
  CHECK_THROWS_WITH_AS(parse_scenario(j, "bad5"), doctest::Contains("time.dt"), ConfigError);
}

TEST_CASE("repeated runs are byte-identical") {
  json j = base_config();
  j["outputs"] = {"moments", "propagator", "invariant_residuals", "classical"};
  j["state"] = {{"type", "coherent"},
                {"alpha", {{"real", {0.7}}, {"imag", {-0.3}}}}};
  const Scenario sc = parse_scenario(j, "determinism");

  const fs::path dir1 = fresh_dir("det1");
  const fs::path dir2 = fresh_dir("det2");
  std::ostringstream log;
  RunOptions o1, o2;
  o1.out_dir = dir1;
  o2.out_dir = dir2;
  CHECK(run_scenario(sc, o1, log) == 0);
  CHECK(run_scenario(sc, o2, log) == 0);

  Eigen::Index compared = 0;
  for (const auto& entry : fs::directory_iterator(dir1)) {
    const auto name = entry.path().filename();
    CHECK(slurp(entry.path()) == slurp(dir2 / name));
    ++compared;
  }
  CHECK(compared == 4 + 5 + 1);  // csv files + svg plots + manifest
}

TEST_CASE("validate passes at the default step and flags tables") {
  json j = base_config();
  const Scenario sc = parse_scenario(j, "validate");
  std::ostringstream log;
  CHECK(validate_scenario(sc, RunOptions{}, log) == 0);
  CHECK(log.str().find("PASS") != std::string::npos);
  CHECK(log.str().find("FAIL") == std::string::npos);

  // a sampled-table schedule draws the reduced-order caveat
  json jt;
  jt["hamiltonian"] = {
      {"table",
       {{"times", {0.0, 3.0}},
        {"A", {{{0.5, 0.0}, {0.0, 0.5}}, {{2.0, 0.0}, {0.0, 0.5}}}}}}};
  jt["time"] = {{"t0", 0.0}, {"t1", 3.0}, {"dt", 0.005}};
  jt["omegas"] = {1.0};
  const Scenario tsc = parse_scenario(jt, "table");
  std::ostringstream tlog;
  const int code = validate_scenario(tsc, RunOptions{}, tlog);
  CHECK(tlog.str().find("linear interpolation") != std::string::npos);
  CHECK(code == 0);
}

TEST_CASE("oversized steps escalate to a solver abort") {
  json j = base_config();
  const Scenario sc = parse_scenario(j, "coarse");
  RunOptions opt;
  opt.dt_override = 1.0;  // ~100x the default
  std::ostringstream log;
  CHECK_THROWS_AS(validate_scenario(sc, opt, log), SolverError);
}

TEST_CASE("oracle-compare agrees for a driven scenario") {
  json j;
  j["hamiltonian"] = {{"preset", "driven_sho"},
                      {"params", {{"omega", 1.0}, {"f", 1.0}}}};
  j["time"] = {{"t0", 0.0}, {"t1", 3.141592653589793}, {"dt", 0.02}};
  j["state"] = {{"type", "coherent"}, {"alpha", {{"real", {0.0}}}}};
  j["oracle"] = {{"cutoff", 25}, {"dt_oracle", 0.002}};
  const Scenario sc = parse_scenario(j, "oracle");
  const fs::path dir = fresh_dir("oracle");
  RunOptions opt;
  opt.out_dir = dir;
  std::ostringstream log;
  CHECK(oracle_compare(sc, opt, log) == 0);
  CHECK(log.str().find("max deviation") != std::string::npos);
  CHECK(fs::exists(dir / "oracle_compare.csv"));
}

TEST_CASE("ladder scenarios convert and run") {
  json j;
  j["hamiltonian"] = {
      {"ladder",
       {{"lambda", 1.0}, {"calA", {{"real", {{0.0, 0.5}, {0.5, 0.0}}}}}}}};
  j["time"] = {{"t0", 0.0}, {"t1", 1.0}, {"dt", 0.01}};
  const Scenario sc = parse_scenario(j, "ladder");
  const fs::path dir = fresh_dir("ladder");
  RunOptions opt;
  opt.out_dir = dir;
  std::ostringstream log;
  CHECK(run_scenario(sc, opt, log) == 0);
  const json manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("resolved").at("hamiltonian").get<std::string>() == "ladder");
  CHECK(manifest.at("resolved").at("omegas").at(0).get<double>() ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shipped scenario files parse and resolve") {
  const fs::path dir = fs::path(PARAOSC_SOURCE_DIR) / "scenarios";
  REQUIRE(fs::exists(dir));
  Eigen::Index seen = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    const Scenario sc = load_scenario(entry.path());
    CHECK(!sc.ham_kind.empty());
    // the pipeline must assemble without touching the solver
    CHECK_NOTHROW(build_pipeline(sc, RunOptions{}));
  }
  CHECK(seen >= 5);
}
