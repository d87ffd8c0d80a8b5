#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "duel/episode_log.hpp"
#include "duel/sim.hpp"

namespace duel {

struct RunOptions {
  std::uint64_t seed = 1;
  int runs = 200;
  std::string opponent = "constant:0";
  std::string controller = "mixing";
  std::filesystem::path out = "out";
  int threads = 0;
  LogDetail batch_log_detail = LogDetail::kCompact;
};

struct ServerOptions {
  int port = 8080;
  double tick_period = 0.2;    // wall-clock seconds per simulation sample
  double countdown = 3.0;      // seconds between ready and start
  double stale_after = 0.5;    // seconds without input before decay kicks in
  std::string bind_address = "0.0.0.0";
  std::filesystem::path ui_dir;  // static cockpit bundle; empty serves a stub page
};

struct AppConfig {
  SimConfig sim;
  RunOptions run;
  ServerOptions server;
};

/// Config problem with a location ("file:line:col: key: message").
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Overlays a YAML file onto `base`. Unknown keys and type mismatches are
/// rejected with their location.
AppConfig LoadConfigFile(const std::filesystem::path& path, AppConfig base = {});
AppConfig LoadConfigString(const std::string& yaml, const std::string& origin,
                           AppConfig base = {});

/// Environment variables that override run/server settings.
inline constexpr const char* kEnvPrefix = "DUEL_";

/// Applies DUEL_SEED, DUEL_RUNS, DUEL_OPPONENT, DUEL_CONTROLLER, DUEL_OUT,
/// DUEL_THREADS and DUEL_SERVE_PORT. `lookup` defaults to std::getenv.
void ApplyEnvironment(AppConfig& config,
                      const std::function<std::optional<std::string>(const std::string&)>&
                          lookup = {});

/// YAML rendering of the full configuration (round-trips through
/// LoadConfigString).
std::string DumpConfig(const AppConfig& config);

}  // namespace duel
