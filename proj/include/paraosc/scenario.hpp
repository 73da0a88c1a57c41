#pragma once

// Batch front door: scenario configs (JSON), the solve -> invariants ->
// propagator -> moments pipeline, and deterministic CSV / SVG / manifest
// emission. Exit-code contract: 0 pass, 1 config error, 2 solver abort,
// 3 validation failure.

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paraosc/fock_oracle.hpp"
#include "paraosc/invariant.hpp"
#include "paraosc/moments.hpp"
#include "paraosc/propagator.hpp"

namespace paraosc {

struct OracleSpec {
  bool enabled = false;
  Eigen::Index cutoff = 40;
  double dt = 0.0;
  double tolerance = tol::oracle_agreement;
  double certify_tol = tol::oracle_certify;
  bool estimate_truncation = true;
};

struct TableSpec {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::VectorXd> B;
  std::vector<double> C;
};

struct Scenario {
  std::optional<Eigen::Index> n_modes;
  std::optional<Eigen::VectorXd> omegas;
  std::string ham_kind;  // "preset" | "table" | "ladder"
  std::string preset_name;
  std::map<std::string, double> preset_params;
  std::optional<TableSpec> table;
  std::optional<LadderRepresentation> ladder;
  StateSpec state = StateSpec::number({});  // empty = vacuum of the right size
  TimeGridSpec time;
  std::vector<std::string> outputs{"moments"};
  OracleSpec oracle;
  nlohmann::ordered_json raw;
  std::string label;
};

Scenario parse_scenario(const nlohmann::ordered_json& config, const std::string& label);
Scenario load_scenario(const std::filesystem::path& path);

struct RunOptions {
  std::filesystem::path out_dir = "paraosc_out";
  std::optional<double> dt_override;
  std::optional<double> t_end_override;
};

/// Resolved simulation inputs shared by run / validate / oracle-compare.
struct Pipeline {
  HamiltonianSchedule ham;
  ReferenceFrequencies omegas;
  TimeGridSpec grid;  // dt resolved to the effective step
  StateSpec state;
  bool default_dt_used = false;
};

Pipeline build_pipeline(const Scenario& sc, const RunOptions& opt);

/// Writes the requested CSV series, SVG plots and the run manifest.
int run_scenario(const Scenario& sc, const RunOptions& opt, std::ostream& log);

/// Prints every residual with its grid maximum and pass/fail verdict.
int validate_scenario(const Scenario& sc, const RunOptions& opt, std::ostream& log);

/// Runs the truncated-Fock oracle next to the invariant method, writes a
/// side-by-side CSV and prints a max-deviation summary line.
int oracle_compare(const Scenario& sc, const RunOptions& opt, std::ostream& log);

/// Per-grid-point residual columns (one row per grid point, one-sided
/// stencils at the ends and at schedule breakpoints).
struct ResidualSeries {
  Eigen::VectorXd canonical, conjugacy, v_equation, u_equation, quadratic, heisenberg,
      z_symplectic, vz_identity;
  double fd_step = 0.0;  // probe step the finite differences used
};

ResidualSeries build_residual_series(const SolutionRecord& rec, const QuadraticInvariant& quad,
                                     const Propagator& prop, const HamiltonianSchedule& ham);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace paraosc
