#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "duel/kinematics.hpp"

namespace duel {

/// Plays its level-k best response every decision cycle.
struct ConstantLevel {
  int level = 0;
};

/// Picks a uniformly random candidate at every sample step.
struct RandomCandidate {};

/// Plays a level that changes over time. An empty schedule is drawn at
/// episode start from `schedule_seed`, or from the episode seed if unset.
struct LevelSwitcher {
  std::vector<std::pair<double, int>> schedule;  // (start time [s], level)
  std::optional<std::uint64_t> schedule_seed;

  int LevelAt(double t) const;
};

/// Inputs supplied from outside (a human or a recorded stream), one per
/// sample step. Past the end of `inputs` the robot receives zero input
/// unless the caller supplies one.
struct External {
  std::vector<ControlInput> inputs;
};

using OpponentModel =
    std::variant<ConstantLevel, RandomCandidate, LevelSwitcher, External>;

/// Parses "constant:K", "random", "switcher", "switcher:SEED",
/// "switcher:L@T,L@T,...", "external" or "zero".
/// Throws std::invalid_argument on anything else.
OpponentModel ParseOpponent(const std::string& spec);

std::string OpponentName(const OpponentModel& model);

/// Random schedule: a level at t = 0 followed by one to three switches,
/// each to a different level, at times drawn from [switch_min, switch_max].
LevelSwitcher RandomSwitchSchedule(std::uint64_t seed, double switch_min = 5.0,
                                   double switch_max = 45.0);

}  // namespace duel
