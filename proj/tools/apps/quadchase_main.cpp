#include <iostream>

#include <CLI11.hpp>

#include "quadchase_tools/commands.hpp"

int main(int argc, char** argv) {
  using namespace quadchase::tools;
  CLI::App app{"Quadcopter chase: batch runs, verification suites and noise sweeps"};
  app.require_subcommand(1);

  CommandOptions options;
  std::string config_path;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* cmd, const std::string& suite_help) {
    cmd->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--out", options.out_dir, "Output directory")->envname("QUADCHASE_OUT");
    cmd->add_option("--seed", seed, "Seed overriding the configuration")->envname("QUADCHASE_SEED");
    cmd->add_option("--suite", options.suite, suite_help);
  };
  CLI::App* run = app.add_subcommand("run", "Run one scenario and write its logs and metrics");
  add_common(run, "sim1, sim2 or config (default)");
  CLI::App* verify = app.add_subcommand("verify", "Run the verification suites");
  add_common(verify, "all (default), conditions, invariance, feasibility, vehicle_ball, prediction");
  CLI::App* sweep = app.add_subcommand("sweep", "Steady-state error over a noise and delay grid");
  add_common(sweep, "scenario preset: sim1 or sim2 (default: configured scenario)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  if (cmd->count("--config")) options.config_path = config_path;
  if (cmd->count("--seed")) options.seed = seed;
  if (cmd == run) return cmd_run(options, std::cout, std::cerr);
  if (cmd == verify) return cmd_verify(options, std::cout, std::cerr);
  return cmd_sweep(options, std::cout, std::cerr);
}
