#pragma once

#include <filesystem>
#include <memory>

#include "duel/config.hpp"

namespace duel::server {

/// HTTP + WebSocket front end on a single port.
///
///   GET /health      {"status":"ok","protocol":1,"sessions":N}
///   GET /ws          WebSocket upgrade, JSON protocol (see protocol.hpp)
///   GET /<path>      static file from ServerOptions::ui_dir (a stub page
///                    when no bundle is configured)
class Server {
 public:
  /// Episode logs of finished sessions go to `log_dir` (empty: none).
  explicit Server(AppConfig config, std::filesystem::path log_dir = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving in background threads. Throws
  /// std::system_error when the address is unavailable (port busy).
  void Start();
  /// Port actually bound (useful with port 0).
  unsigned short port() const;
  /// Blocks until Stop() is called from another thread or a signal.
  void Wait();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace duel::server
