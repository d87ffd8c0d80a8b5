#include "duel/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace duel {
namespace {

std::string Where(const std::string& origin, const YAML::Mark& mark) {
  return origin + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
}

// Reads the known keys of one mapping and rejects everything else.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, const std::string& origin)
      : path_(std::move(path)), origin_(origin) {
    if (node && !node.IsNull()) {
      if (!node.IsMap()) Fail(node.Mark(), path_, "expected a mapping");
      node_ = node;
      present_ = true;
    }
  }

  template <typename T>
  void Read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!present_) return;
    const YAML::Node& map = node_;
    const YAML::Node value = map[key];
    if (!value) return;
    try {
      out = value.as<T>();
    } catch (const YAML::Exception&) {
      Fail(value.Mark(), Key(key), "wrong type");
    }
  }

  template <typename T, std::size_t N>
  void ReadArray(const std::string& key, std::array<T, N>& out) {
    std::vector<T> values(out.begin(), out.end());
    Read(key, values);
    if (present_ && values.size() != N) {
      const YAML::Node& map = node_;
      Fail(map[key].Mark(), Key(key), "expected " + std::to_string(N) + " values");
    }
    std::copy(values.begin(), values.end(), out.begin());
  }

  Section Child(const std::string& key) {
    seen_.insert(key);
    const YAML::Node& map = node_;
    return present_ ? Section(map[key], Key(key), origin_)
                    : Section(YAML::Node(), Key(key), origin_);
  }

  const YAML::Node& node() const { return node_; }
  std::string Key(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] void Fail(const YAML::Mark& mark, const std::string& key,
                         const std::string& message) const {
    throw ConfigError(Where(origin_, mark) + ": " + key + ": " + message);
  }

  void Finish() const {
    if (!present_) return;
    for (const auto& entry : node_) {
      const std::string key = entry.first.as<std::string>();
      if (!seen_.count(key)) Fail(entry.first.Mark(), Key(key), "unknown key");
    }
  }

 private:
  YAML::Node node_;
  bool present_ = false;
  std::string path_;
  const std::string& origin_;
  std::set<std::string> seen_;
};

AppConfig Parse(const YAML::Node& root, const std::string& origin, AppConfig cfg) {
  if (!root || root.IsNull()) return cfg;
  Section top(root, "", origin);
  SimConfig& sim = cfg.sim;

  {
    Section s = top.Child("sim");
    s.Read("sample_time", sim.sample_time);
    s.Read("decision_cycle", sim.decision_cycle);
    s.Read("episode_limit", sim.episode_limit);
    s.Read("track_min", sim.track_min);
    s.Read("track_max", sim.track_max);
    s.Read("footprint", sim.footprint);
    s.Read("ego_v_max", sim.ego_limits.v_max);
    s.Read("opponent_v_max", sim.opponent_limits.v_max);
    double omega_max = sim.ego_limits.omega_max;
    s.Read("omega_max", omega_max);
    sim.ego_limits.omega_max = sim.opponent_limits.omega_max = omega_max;
    s.Read("ego_start_x", sim.ego_start_x);
    s.Read("ego_start_y", sim.ego_start_y);
    s.Read("ego_initial_speed", sim.ego_initial_speed);
    s.Read("opponent_initial_speed", sim.opponent_initial_speed);
    s.Read("max_initial_gap", sim.max_initial_gap);
    s.Read("opponent_y_min", sim.opponent_y_min);
    s.Read("opponent_y_max", sim.opponent_y_max);
    std::string seed = sim.acceleration_seed == AccelerationSeed::kZero ? "zero"
                                                                        : "finite_difference";
    s.Read("acceleration_seed", seed);
    if (seed == "zero") {
      sim.acceleration_seed = AccelerationSeed::kZero;
    } else if (seed == "finite_difference") {
      sim.acceleration_seed = AccelerationSeed::kFiniteDifference;
    } else {
      s.Fail(s.node()["acceleration_seed"].Mark(), s.Key("acceleration_seed"),
             "expected finite_difference or zero");
    }
    s.Finish();
  }
  {
    Section s = top.Child("planning");
    s.Read("a_set_values", sim.a_set_values);
    s.Read("y_target_values", sim.y_target_values);
    s.Read("horizon", sim.plan_horizon);
    s.Read("max_level", sim.max_level);
    s.Finish();
  }
  {
    Section s = top.Child("reward");
    s.Read("w_position", sim.reward.weights.position);
    s.Read("w_relative", sim.reward.weights.relative);
    s.Read("w_block", sim.reward.weights.block);
    s.Read("track_width", sim.reward.track_width);
    s.Finish();
  }
  {
    Section s = top.Child("estimation");
    s.Read("belief_step", sim.estimation.belief_step);
    s.Read("potential_limit", sim.estimation.potential_limit);
    s.Read("potential_hold", sim.estimation.potential_hold);
    s.Read("window", sim.estimation.window);
    s.Finish();
  }
  {
    Section s = top.Child("tracker");
    s.Read("horizon", sim.tracker_horizon);
    s.ReadArray("state_weights", sim.tracker_state_weights);
    s.ReadArray("input_weights", sim.tracker_input_weights);
    s.Read("iterations", sim.tracker_iterations);
    s.Finish();
  }
  {
    Section s = top.Child("run");
    s.Read("seed", cfg.run.seed);
    s.Read("runs", cfg.run.runs);
    s.Read("opponent", cfg.run.opponent);
    s.Read("controller", cfg.run.controller);
    std::string out = cfg.run.out.string();
    s.Read("out", out);
    cfg.run.out = out;
    s.Read("threads", cfg.run.threads);
    std::string detail = cfg.run.batch_log_detail == LogDetail::kFull ? "full" : "compact";
    s.Read("batch_log_detail", detail);
    if (detail == "full") {
      cfg.run.batch_log_detail = LogDetail::kFull;
    } else if (detail == "compact") {
      cfg.run.batch_log_detail = LogDetail::kCompact;
    } else {
      s.Fail(s.node()["batch_log_detail"].Mark(), s.Key("batch_log_detail"),
             "expected full or compact");
    }
    s.Finish();
  }
  {
    Section s = top.Child("server");
    s.Read("port", cfg.server.port);
    s.Read("tick_period", cfg.server.tick_period);
    s.Read("countdown", cfg.server.countdown);
    s.Read("stale_after", cfg.server.stale_after);
    s.Read("bind_address", cfg.server.bind_address);
    std::string ui = cfg.server.ui_dir.string();
    s.Read("ui_dir", ui);
    cfg.server.ui_dir = ui;
    s.Finish();
  }
  top.Finish();

  try {
    cfg.sim.Validate();
    ParseController(cfg.run.controller);
    ParseOpponent(cfg.run.opponent);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

}  // namespace

AppConfig LoadConfigString(const std::string& yaml, const std::string& origin,
                           AppConfig base) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(Where(origin, e.mark) + ": " + e.msg);
  }
  return Parse(root, origin, std::move(base));
}

AppConfig LoadConfigFile(const std::filesystem::path& path, AppConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return LoadConfigString(ss.str(), path.string(), std::move(base));
}

void ApplyEnvironment(
    AppConfig& config,
    const std::function<std::optional<std::string>(const std::string&)>& lookup) {
  auto get = [&](const std::string& name) -> std::optional<std::string> {
    const std::string key = std::string(kEnvPrefix) + name;
    if (lookup) return lookup(key);
    if (const char* v = std::getenv(key.c_str())) return std::string(v);
    return std::nullopt;
  };
  auto number = [&](const std::string& name, const std::string& text) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(std::string(kEnvPrefix) + name + ": expected an integer, got '" +
                        text + "'");
    }
  };
  if (auto v = get("SEED")) config.run.seed = static_cast<std::uint64_t>(number("SEED", *v));
  if (auto v = get("RUNS")) config.run.runs = static_cast<int>(number("RUNS", *v));
  if (auto v = get("THREADS")) config.run.threads = static_cast<int>(number("THREADS", *v));
  if (auto v = get("SERVE_PORT")) config.server.port = static_cast<int>(number("SERVE_PORT", *v));
  if (auto v = get("OPPONENT")) config.run.opponent = *v;
  if (auto v = get("CONTROLLER")) config.run.controller = *v;
  if (auto v = get("OUT")) config.run.out = *v;
}

namespace {

// Shortest text that reads back to the same double.
std::string Num(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::vector<std::string> Nums(const std::vector<double>& values) {
  std::vector<std::string> out;
  for (double v : values) out.push_back(Num(v));
  return out;
}

}  // namespace

std::string DumpConfig(const AppConfig& c) {
  const SimConfig& s = c.sim;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap
      << YAML::Key << "sample_time" << YAML::Value << Num(s.sample_time)
      << YAML::Key << "decision_cycle" << YAML::Value << Num(s.decision_cycle)
      << YAML::Key << "episode_limit" << YAML::Value << Num(s.episode_limit)
      << YAML::Key << "track_min" << YAML::Value << Num(s.track_min)
      << YAML::Key << "track_max" << YAML::Value << Num(s.track_max)
      << YAML::Key << "footprint" << YAML::Value << Num(s.footprint)
      << YAML::Key << "ego_v_max" << YAML::Value << Num(s.ego_limits.v_max)
      << YAML::Key << "opponent_v_max" << YAML::Value << Num(s.opponent_limits.v_max)
      << YAML::Key << "omega_max" << YAML::Value << Num(s.ego_limits.omega_max)
      << YAML::Key << "ego_start_x" << YAML::Value << Num(s.ego_start_x)
      << YAML::Key << "ego_start_y" << YAML::Value << Num(s.ego_start_y)
      << YAML::Key << "ego_initial_speed" << YAML::Value << Num(s.ego_initial_speed)
      << YAML::Key << "opponent_initial_speed" << YAML::Value << Num(s.opponent_initial_speed)
      << YAML::Key << "max_initial_gap" << YAML::Value << Num(s.max_initial_gap)
      << YAML::Key << "opponent_y_min" << YAML::Value << Num(s.opponent_y_min)
      << YAML::Key << "opponent_y_max" << YAML::Value << Num(s.opponent_y_max)
      << YAML::Key << "acceleration_seed" << YAML::Value
      << (s.acceleration_seed == AccelerationSeed::kZero ? "zero" : "finite_difference")
      << YAML::EndMap;
  out << YAML::Key << "planning" << YAML::Value << YAML::BeginMap
      << YAML::Key << "a_set_values" << YAML::Value << YAML::Flow << Nums(s.a_set_values)
      << YAML::Key << "y_target_values" << YAML::Value << YAML::Flow << Nums(s.y_target_values)
      << YAML::Key << "horizon" << YAML::Value << Num(s.plan_horizon)
      << YAML::Key << "max_level" << YAML::Value << s.max_level << YAML::EndMap;
  out << YAML::Key << "reward" << YAML::Value << YAML::BeginMap
      << YAML::Key << "w_position" << YAML::Value << Num(s.reward.weights.position)
      << YAML::Key << "w_relative" << YAML::Value << Num(s.reward.weights.relative)
      << YAML::Key << "w_block" << YAML::Value << Num(s.reward.weights.block)
      << YAML::Key << "track_width" << YAML::Value << Num(s.reward.track_width) << YAML::EndMap;
  out << YAML::Key << "estimation" << YAML::Value << YAML::BeginMap
      << YAML::Key << "belief_step" << YAML::Value << Num(s.estimation.belief_step)
      << YAML::Key << "potential_limit" << YAML::Value << Num(s.estimation.potential_limit)
      << YAML::Key << "potential_hold" << YAML::Value << Num(s.estimation.potential_hold)
      << YAML::Key << "window" << YAML::Value << s.estimation.window << YAML::EndMap;
  out << YAML::Key << "tracker" << YAML::Value << YAML::BeginMap
      << YAML::Key << "horizon" << YAML::Value << s.tracker_horizon
      << YAML::Key << "state_weights" << YAML::Value << YAML::Flow
      << Nums({s.tracker_state_weights.begin(), s.tracker_state_weights.end()})
      << YAML::Key << "input_weights" << YAML::Value << YAML::Flow
      << Nums({s.tracker_input_weights.begin(), s.tracker_input_weights.end()})
      << YAML::Key << "iterations" << YAML::Value << s.tracker_iterations << YAML::EndMap;
  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap
      << YAML::Key << "seed" << YAML::Value << c.run.seed
      << YAML::Key << "runs" << YAML::Value << c.run.runs
      << YAML::Key << "opponent" << YAML::Value << c.run.opponent
      << YAML::Key << "controller" << YAML::Value << c.run.controller
      << YAML::Key << "out" << YAML::Value << c.run.out.string()
      << YAML::Key << "threads" << YAML::Value << c.run.threads
      << YAML::Key << "batch_log_detail" << YAML::Value
      << (c.run.batch_log_detail == LogDetail::kFull ? "full" : "compact") << YAML::EndMap;
  out << YAML::Key << "server" << YAML::Value << YAML::BeginMap
      << YAML::Key << "port" << YAML::Value << c.server.port
      << YAML::Key << "tick_period" << YAML::Value << Num(c.server.tick_period)
      << YAML::Key << "countdown" << YAML::Value << Num(c.server.countdown)
      << YAML::Key << "stale_after" << YAML::Value << Num(c.server.stale_after)
      << YAML::Key << "bind_address" << YAML::Value << c.server.bind_address
      << YAML::Key << "ui_dir" << YAML::Value << c.server.ui_dir.string() << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace duel
