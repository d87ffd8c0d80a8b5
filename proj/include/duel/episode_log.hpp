#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "duel/sim.hpp"

namespace duel {

/// Line-delimited JSON episode log.
///
///   {"type":"header", "schema":"duel-episode/1", seed, controller, opponent, detail}
///   {"type":"sample", step, t, ego{x,y,theta,vx,vy}, opponent{...},
///    ego_input[v,omega], opponent_input[v,omega], clamped[ego,opp], fallback}
///   {"type":"cycle", step, t, beliefs[3], potential, estimation_ran,
///    matched_level|null, estimated_level, failsafe_level, degenerate,
///    ego_levels[], opponent_levels[], best_index, failsafe_index,
///    opponent_level|null, candidates[[a_set,y_target,clamped]...],
///    decision_ms, and with full detail best/failsafe/mixed [[t,x,y]...]}
///   {"type":"result", outcome, collision, aborted, abort_reason, end_step,
///    end_time, clamp_events}
///
/// Each cycle line follows the sample line of the same step.
inline constexpr const char* kEpisodeSchema = "duel-episode/1";

enum class LogDetail { kFull, kCompact };

struct LogOptions {
  LogDetail detail = LogDetail::kFull;
  bool include_latency = true;
};

void WriteEpisodeLog(std::ostream& os, const EpisodeRecord& record,
                     const LogOptions& options = {});

void WriteEpisodeLog(const std::filesystem::path& path,
                     const EpisodeRecord& record, const LogOptions& options = {});

/// Inverse of WriteEpisodeLog. Throws std::runtime_error with the line
/// number on malformed input.
EpisodeRecord ReadEpisodeLog(std::istream& is);
EpisodeRecord ReadEpisodeLog(const std::filesystem::path& path);

/// [[t, x, y], ...]
std::string TrajectoryToJson(const Trajectory& traj);

}  // namespace duel
