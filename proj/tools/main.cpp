#include <iostream>

#include "CLI11.hpp"
#include "ellcbf/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace ellcbf::cli;

  CLI::App app{"Collision avoidance for elliptical agents with supporting-line barrier functions"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write trajectory, summary and resolved scenario");
  run_cmd->add_option("scenario", run.scenario, "Scenario file (.cfg) or scenario_resolved.csv")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--out,-o", run.out, "Output directory")->required();

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "Randomized duality, gradient and QP property checks");
  verify_cmd->add_option("--seed", verify.seed, "Master seed")->capture_default_str();
  verify_cmd->add_option("--trials", verify.trials, "Number of trials")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--out,-o", verify.out, "Output directory")->capture_default_str();

  PlotDataOptions plot;
  std::string scenario;
  auto* plot_cmd = app.add_subcommand("plotdata", "Plot-ready boundary, line and time-series data from a trajectory");
  plot_cmd->add_option("trajectory", plot.trajectory, "trajectory.csv written by `run`")
      ->required()
      ->check(CLI::ExistingFile);
  plot_cmd->add_option("--out,-o", plot.out, "Output directory")->required();
  plot_cmd->add_option("--snapshots", plot.snapshots, "Comma-separated snapshot times (default 0,0.8,2,4)")
      ->delimiter(',');
  plot_cmd->add_option("--scenario", scenario, "Resolved scenario (default: scenario_resolved.csv beside the trajectory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (*run_cmd) return runCommand(run, std::cout, std::cerr);
  if (*verify_cmd) return verifyCommand(verify, std::cout, std::cerr);
  if (!scenario.empty()) plot.scenario = scenario;
  return plotDataCommand(plot, std::cout, std::cerr);
}
