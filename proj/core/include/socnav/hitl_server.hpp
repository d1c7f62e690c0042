#pragma once

#include "socnav/hitl.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace socnav::hitl {

namespace detail {
struct ServerState;
}

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 0;  ///< 0 picks a free port
  /// Directory served over plain HTTP next to the websocket endpoint; empty serves nothing.
  std::filesystem::path static_dir;
  /// Wall-clock seconds between ticks. Defaults to the scenario dt when unset.
  std::optional<double> tick_period;
  /// Recording written when the episode finishes or the server stops.
  std::optional<std::filesystem::path> record_path;
  SessionOptions session;
};

struct ServerStats {
  int ticks = 0;
  int overruns = 0;
  int malformed = 0;  ///< client messages dropped as unusable
  int refused = 0;    ///< handshakes refused (schema or busy)
  int clients = 0;    ///< handshakes accepted
  bool connected = false;
  bool finished = false;
};

/// Websocket front end for one Session. One io thread handles sockets; a second thread runs the
/// fixed-rate loop. The loop only advances while a client is attached and its input is fresh.
class Server {
 public:
  Server(Scenario scenario, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts both threads. Throws std::runtime_error if the address cannot be bound.
  void start();
  void stop();
  /// Blocks until the episode finishes or stop() is called.
  void wait();
  /// Like wait() but gives up after `seconds`; returns whether the episode finished.
  bool wait_for(double seconds);

  std::uint16_t port() const;
  ServerStats stats() const;
  EpisodeLog log() const;
  Recording recording() const;

 private:
  std::unique_ptr<detail::ServerState> impl_;
};

}  // namespace socnav::hitl
