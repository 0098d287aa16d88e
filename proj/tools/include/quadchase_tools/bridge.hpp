#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "quadchase_tools/config.hpp"
#include "quadchase_tools/session.hpp"

namespace quadchase::tools {

struct BridgeOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;  ///< 0 picks a free port
  double tick_hz = 20.0;
  /// Outgoing frames buffered per client; the oldest is dropped beyond this.
  std::size_t queue_limit = 64;
  int threads = 2;
  /// Session logs go to <log_dir>/<session id>/ when the session ends.
  std::optional<std::filesystem::path> log_dir;
  RunConfig config = default_run_config();
  SessionOptions session;
};

/**
 * WebSocket and HTTP front end for live sessions.
 *
 *   WS  /session[?id=NAME][&paused=1]  join NAME, or open a new session
 *   GET /health                        {"status": "ok", ...}
 *   GET /sessions                      one summary per open session
 *
 * Each session runs its own fixed-rate tick loop on its own strand. Client
 * frames are fed to the session in arrival order; state frames fan out to
 * every client through a bounded drop-oldest queue, so a slow client never
 * holds up the loop. A tick that starts late is logged and still run. A
 * session ends, and writes its logs, when its last client leaves or the
 * bridge stops.
 */
class Bridge {
 public:
  explicit Bridge(BridgeOptions options);
  ~Bridge();
  Bridge(const Bridge&) = delete;
  Bridge& operator=(const Bridge&) = delete;

  /// Binds and starts the worker threads. Throws on bind failure.
  void start();
  /// Ends every session (writing logs) and joins the workers. Idempotent.
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

  std::uint16_t port() const;
  std::uint64_t missed_deadlines() const;

  struct Impl;  ///< opaque; shared with the connection handlers

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace quadchase::tools
