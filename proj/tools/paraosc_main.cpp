#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "paraosc/scenario.hpp"

namespace {

// exit codes: 0 pass, 1 config error, 2 solver abort, 3 validation failure
int dispatch(const std::string& command, const std::string& scenario_path,
             const paraosc::RunOptions& opt) {
  const paraosc::Scenario sc = paraosc::load_scenario(scenario_path);
  if (command == "run") return paraosc::run_scenario(sc, opt, std::cout);
  if (command == "validate") return paraosc::validate_scenario(sc, opt, std::cout);
  return paraosc::oracle_compare(sc, opt, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "paraosc: invariant-method simulator for N coupled time-dependent oscillators"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "paraosc_out";
  double dt_override = 0.0;
  double t_end_override = 0.0;

  auto* run = app.add_subcommand("run", "solve a scenario and write CSV/SVG artifacts");
  run->add_option("scenario", scenario_path, "scenario config file")->required();
  run->add_option("--out", out_dir, "output directory")->envname("PARAOSC_OUT");
  run->add_option("--dt", dt_override, "override the time step");
  run->add_option("--t-end", t_end_override, "override the end time");

  auto* validate = app.add_subcommand("validate", "print residual maxima and pass/fail");
  validate->add_option("scenario", scenario_path, "scenario config file")->required();
  validate->add_option("--dt", dt_override, "override the time step");

  auto* oracle = app.add_subcommand("oracle-compare",
                                    "compare against the truncated-Fock oracle");
  oracle->add_option("scenario", scenario_path, "scenario config file")->required();
  oracle->add_option("--out", out_dir, "output directory")->envname("PARAOSC_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  paraosc::RunOptions opt;
  opt.out_dir = out_dir;
  if (run->count("--dt") || validate->count("--dt")) opt.dt_override = dt_override;
  if (run->count("--t-end")) opt.t_end_override = t_end_override;

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, scenario_path, opt);
  } catch (const paraosc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const paraosc::SolverError& e) {
    std::cerr << "solver abort: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
