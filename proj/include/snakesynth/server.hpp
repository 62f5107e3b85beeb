#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "snakesynth/session.hpp"

namespace snakesynth {

struct ServerConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  int threads = 2;
  SessionConfig session;
  /// Served at "/".
  std::string index_html;
  /// Served at session.mosaic_route.
  std::vector<std::uint8_t> mosaic_pgm;
};

/// HTTP + WebSocket endpoint. GET "/" and the mosaic route are static; an
/// upgrade request on "/session" opens one independent Session.
class Server {
 public:
  Server(const ClipBank& bank, GridSpec spec, ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving on background threads.
  void start();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

  unsigned short port() const;
  std::size_t sessions_opened() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Minimal page served at "/" when no UI bundle is configured.
std::string default_index_html();

}  // namespace snakesynth
