#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "lbt/session/hub.hpp"

namespace httplib {
class Server;
}

namespace lbt::server {

// Keys of the `serve` config file (YAML), all optional.
struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path log_dir;  // default: $LBT_LOG_DIR, else ./logs
  std::vector<std::filesystem::path> content_packs;  // added to the built-in games
  std::int64_t tick_ms = 50;
  bool auto_finalize = true;
  std::filesystem::path static_dir;  // served under /ui/ when set
};

// Throws DataError with the file and line for malformed or mistyped keys.
ServeConfig load_serve_config(const std::filesystem::path& path);
ServeConfig parse_serve_config(std::string_view text, std::string_view source);

// Monotonic milliseconds since construction.
class SteadyClock {
 public:
  SteadyClock() : start_(std::chrono::steady_clock::now()) {}
  std::int64_t now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// HTTP control endpoints and message bridge for a Hub.
///
///   GET  /healthz
///   GET  /v1/games
///   GET  /v1/sessions                     POST /v1/sessions
///   GET  /v1/sessions/{id}
///   GET  /v1/sessions/{id}/log            GET  /v1/sessions/{id}/transcript
///   POST /v1/sessions/{id}/events         (from_client envelope)
///   POST /v1/sessions/{id}/advance        POST /v1/sessions/{id}/finalize
///   GET  /v1/sessions/{id}/messages?topic=to_ui|to_robot&after=N
///
/// Inbound events are stamped with the hub clock on receipt. A ticker
/// thread fires session timers every tick_ms.
class HttpServer {
 public:
  HttpServer(session::Hub& hub, std::function<std::int64_t()> clock, std::int64_t tick_ms = 50,
             std::filesystem::path static_dir = {});
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and starts serving in the background. Port 0 picks a free port.
  // Returns the bound port; throws std::runtime_error when binding fails.
  int start(const std::string& host, int port);
  // Stops serving and the ticker. Idempotent.
  void stop();

 private:
  void routes();

  session::Hub& hub_;
  std::function<std::int64_t()> clock_;
  std::int64_t tick_ms_;
  std::filesystem::path static_dir_;
  std::unique_ptr<httplib::Server> http_;
  std::thread listener_;
  std::thread ticker_;
  std::atomic<bool> running_{false};
};

}  // namespace lbt::server
