#include <iostream>

#include <CLI11.hpp>

#include "quadchase_tools/bridge.hpp"
#include "quadchase_tools/commands.hpp"

int main(int argc, char** argv) {
  using namespace quadchase::tools;
  CLI::App app{"Live chase sessions over WebSocket"};
  BridgeOptions options;
  std::string config_path;
  std::string log_dir;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--address", options.address, "Listen address");
  app.add_option("--port", options.port, "Listen port (0 picks a free one)");
  app.add_option("--tick-hz", options.tick_hz, "Session tick rate");
  app.add_option("--queue", options.queue_limit, "Frames buffered per client before dropping");
  app.add_option("--threads", options.threads, "Worker threads");
  app.add_option("--log-dir", log_dir, "Directory for session logs")->envname("QUADCHASE_OUT");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  try {
    if (!config_path.empty()) options.config = load_config(config_path);
    if (!log_dir.empty()) options.log_dir = log_dir;
    Bridge bridge(std::move(options));
    bridge.start();
    std::cout << "listening on port " << bridge.port() << std::endl;
    bridge.wait();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}
