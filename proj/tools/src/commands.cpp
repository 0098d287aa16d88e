#include "quadchase_tools/commands.hpp"

#include <exception>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "quadchase_tools/config.hpp"
#include "quadchase_tools/io.hpp"
#include "quadchase_tools/suites.hpp"

namespace quadchase::tools {

using nlohmann::json;

namespace {

RunConfig prepare(const CommandOptions& options) {
  RunConfig config = options.config_path ? load_config(*options.config_path) : default_run_config();
  if (options.seed) {
    config.scenario.seed = *options.seed;
    config.verify.seed = *options.seed;
    config.sweep.seeds = {*options.seed};
  }
  config.validate();
  return config;
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

}  // namespace

int cmd_run(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig config = prepare(options);
    const std::string suite = options.suite.empty() ? "config" : options.suite;
    if (suite != "config") config.scenario = preset_scenario(suite, config.scenario);
    const Controller controller = config.make_controller();
    config.scenario.validate(controller);
    const SimLog log = run_scenario(config.scenario, controller);
    const TrackingMetrics m = compute_metrics(log);

    json metrics = metrics_json(m, 0.25);
    bool pass = m.faults == 0;
    if (suite == "sim1") {
      metrics["bound"] = {{"metric", "steady_state_error"}, {"value", kSim1SteadyStateBound}};
      pass = pass && m.steady_state <= kSim1SteadyStateBound;
    } else if (suite == "sim2") {
      metrics["bound"] = {{"metric", "outside_reversal_peak"},
                          {"value", kSim2OutsideReversalBound}};
      pass = pass && m.outside_reversal_peak <= kSim2OutsideReversalBound;
    }
    metrics["scenario"] = log.name;
    metrics["seed"] = log.seed;
    metrics["pass"] = pass;

    const std::filesystem::path dir = options.out_dir;
    std::ostringstream csv, tel, pred;
    write_log_csv(csv, log);
    write_telemetry_csv(tel, log);
    write_prediction_csv(pred, log);
    write_file(dir / "log.csv", csv.str());
    write_file(dir / "telemetry.csv", tel.str());
    write_file(dir / "prediction.csv", pred.str());
    write_file(dir / "log.json", log_json(log).dump(2) + "\n");
    write_file(dir / "metrics.json", metrics.dump(2) + "\n");
    write_file(dir / "config.json", to_json(config).dump(2) + "\n");

    out << log.name << " seed=" << log.seed << " steady_state=" << m.steady_state
        << " peak=" << m.peak << " outside_reversal_peak=" << m.outside_reversal_peak
        << " faults=" << m.faults << (pass ? " PASS" : " FAIL") << '\n';
    return pass ? kExitOk : kExitCheckFailed;
  });
}

int cmd_verify(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = prepare(options);
    const std::vector<CheckResult> checks =
        run_verify(config, options.suite.empty() ? "all" : options.suite);
    const json report = verify_report(checks);
    write_file(std::filesystem::path(options.out_dir) / "verify.json", report.dump(2) + "\n");
    for (const CheckResult& c : checks) {
      out << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
    }
    return report["pass"].get<bool>() ? kExitOk : kExitCheckFailed;
  });
}

int cmd_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig config = prepare(options);
    if (!options.suite.empty()) config.scenario = preset_scenario(options.suite, config.scenario);
    config.scenario.validate(config.make_controller());
    const SweepResult result = run_sweep(config);
    std::ostringstream csv;
    write_sweep_csv(csv, result);
    const std::filesystem::path dir = options.out_dir;
    write_file(dir / "sweep.csv", csv.str());
    write_file(dir / "sweep.json", sweep_json(result).dump(2) + "\n");
    out << csv.str();
    for (const auto& [delay, ok] : result.monotone) {
      out << "delay=" << delay << (ok ? " non-decreasing in sigma" : " NOT non-decreasing in sigma")
          << '\n';
    }
    return result.all_monotone() ? kExitOk : kExitCheckFailed;
  });
}

}  // namespace quadchase::tools
