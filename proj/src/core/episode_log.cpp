#include "duel/episode_log.hpp"

#include <fstream>
#include "json.hpp"
#include <stdexcept>

namespace duel {
namespace {

using nlohmann::json;

json StateJson(const KinodynamicState& s) {
  return {{"x", s.x}, {"y", s.y}, {"theta", s.theta}, {"vx", s.vx}, {"vy", s.vy}};
}

KinodynamicState StateFrom(const json& j) {
  KinodynamicState s;
  s.x = j.at("x");
  s.y = j.at("y");
  s.theta = j.at("theta");
  s.vx = j.at("vx");
  s.vy = j.at("vy");
  return s;
}

json TrajJson(const Trajectory& traj) {
  json out = json::array();
  for (const TrajectorySample& s : traj.samples) out.push_back({s.t, s.x, s.y});
  return out;
}

Trajectory TrajFrom(const json& j) {
  Trajectory t;
  for (const json& p : j) t.samples.push_back({p.at(0), p.at(1), p.at(2)});
  return t;
}

json OptionalInt(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

std::optional<int> OptionalIntFrom(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<int>();
}

}  // namespace

std::string TrajectoryToJson(const Trajectory& traj) { return TrajJson(traj).dump(); }

void WriteEpisodeLog(std::ostream& os, const EpisodeRecord& record,
                     const LogOptions& options) {
  const bool full = options.detail == LogDetail::kFull;
  os << json{{"type", "header"},
             {"schema", kEpisodeSchema},
             {"seed", record.seed},
             {"controller", record.controller},
             {"opponent", record.opponent},
             {"detail", full ? "full" : "compact"}}
            .dump()
     << '\n';

  std::size_t next_cycle = 0;
  for (const SampleRecord& s : record.samples) {
    os << json{{"type", "sample"},
               {"step", s.step},
               {"t", s.t},
               {"ego", StateJson(s.ego)},
               {"opponent", StateJson(s.opponent)},
               {"ego_input", {s.ego_input.v, s.ego_input.omega}},
               {"opponent_input", {s.opponent_input.v, s.opponent_input.omega}},
               {"clamped", {s.ego_clamped, s.opponent_clamped}},
               {"fallback", s.ego_fallback}}
              .dump()
       << '\n';
    while (next_cycle < record.cycles.size() &&
           record.cycles[next_cycle].step == s.step) {
      const CycleRecord& c = record.cycles[next_cycle++];
      json candidates = json::array();
      for (const CandidateMeta& m : c.ego_candidates) {
        candidates.push_back({m.a_set, m.y_target, m.lateral_clamped});
      }
      json line{{"type", "cycle"},
                {"step", c.step},
                {"t", c.t},
                {"beliefs", c.beliefs},
                {"potential", c.potential},
                {"estimation_ran", c.estimation_ran},
                {"matched_level", OptionalInt(c.matched_level)},
                {"estimated_level", c.estimated_level},
                {"failsafe_level", c.failsafe_level},
                {"degenerate", c.degenerate},
                {"ego_levels", c.ego_levels},
                {"opponent_levels", c.opponent_levels},
                {"best_index", c.best_index},
                {"failsafe_index", c.failsafe_index},
                {"opponent_level", OptionalInt(c.opponent_plan_level)},
                {"candidates", candidates}};
      if (full) {
        line["best"] = TrajJson(c.best);
        line["failsafe"] = TrajJson(c.failsafe);
        line["mixed"] = TrajJson(c.mixed);
      }
      if (options.include_latency) line["decision_ms"] = c.decision_ms;
      os << line.dump() << '\n';
    }
  }

  os << json{{"type", "result"},
             {"outcome", ToString(record.outcome)},
             {"collision", record.collision},
             {"aborted", record.aborted},
             {"abort_reason", record.abort_reason},
             {"end_step", record.end_step},
             {"end_time", record.end_time},
             {"clamp_events", record.clamp_events}}
            .dump()
     << '\n';
}

void WriteEpisodeLog(const std::filesystem::path& path,
                     const EpisodeRecord& record, const LogOptions& options) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write episode log " + path.string());
  WriteEpisodeLog(os, record, options);
  if (!os) throw std::runtime_error("error writing episode log " + path.string());
}

EpisodeRecord ReadEpisodeLog(std::istream& is) {
  EpisodeRecord record;
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  bool saw_result = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type");
      if (type == "header") {
        if (j.at("schema") != kEpisodeSchema) {
          throw std::runtime_error("unsupported schema " + j.at("schema").dump());
        }
        record.seed = j.at("seed");
        record.controller = j.at("controller");
        record.opponent = j.at("opponent");
        saw_header = true;
      } else if (type == "sample") {
        SampleRecord s;
        s.step = j.at("step");
        s.t = j.at("t");
        s.ego = StateFrom(j.at("ego"));
        s.opponent = StateFrom(j.at("opponent"));
        s.ego_input = {j.at("ego_input").at(0), j.at("ego_input").at(1)};
        s.opponent_input = {j.at("opponent_input").at(0), j.at("opponent_input").at(1)};
        s.ego_clamped = j.at("clamped").at(0);
        s.opponent_clamped = j.at("clamped").at(1);
        s.ego_fallback = j.at("fallback");
        record.samples.push_back(s);
      } else if (type == "cycle") {
        CycleRecord c;
        c.step = j.at("step");
        c.t = j.at("t");
        c.beliefs = j.at("beliefs");
        c.potential = j.at("potential");
        c.estimation_ran = j.at("estimation_ran");
        c.matched_level = OptionalIntFrom(j.at("matched_level"));
        c.estimated_level = j.at("estimated_level");
        c.failsafe_level = j.at("failsafe_level");
        c.degenerate = j.at("degenerate");
        c.ego_levels = j.at("ego_levels").get<std::vector<int>>();
        c.opponent_levels = j.at("opponent_levels").get<std::vector<int>>();
        c.best_index = j.at("best_index");
        c.failsafe_index = j.at("failsafe_index");
        c.opponent_plan_level = OptionalIntFrom(j.at("opponent_level"));
        for (const json& m : j.at("candidates")) {
          c.ego_candidates.push_back({m.at(0), m.at(1), m.at(2)});
        }
        if (j.contains("best")) {
          c.best = TrajFrom(j.at("best"));
          c.failsafe = TrajFrom(j.at("failsafe"));
          c.mixed = TrajFrom(j.at("mixed"));
        }
        c.decision_ms = j.value("decision_ms", 0.0);
        record.cycles.push_back(std::move(c));
      } else if (type == "result") {
        const std::string outcome = j.at("outcome");
        if (outcome == "blocking_success") {
          record.outcome = Outcome::kBlockingSuccess;
        } else if (outcome == "overtaking_success") {
          record.outcome = Outcome::kOvertakingSuccess;
        } else {
          throw std::runtime_error("unknown outcome " + outcome);
        }
        record.collision = j.at("collision");
        record.aborted = j.at("aborted");
        record.abort_reason = j.at("abort_reason");
        record.end_step = j.at("end_step");
        record.end_time = j.at("end_time");
        record.clamp_events = j.at("clamp_events");
        saw_result = true;
      } else {
        throw std::runtime_error("unknown record type " + type);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("episode log line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  if (!saw_header || !saw_result) {
    throw std::runtime_error("episode log is missing its header or result line");
  }
  return record;
}

EpisodeRecord ReadEpisodeLog(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open episode log " + path.string());
  return ReadEpisodeLog(is);
}

}  // namespace duel
