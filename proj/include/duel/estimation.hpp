#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "duel/levelk.hpp"
#include "duel/trajectory.hpp"

namespace duel {

inline constexpr int kOpponentLevels = 3;

struct EstimationParams {
  double belief_step = 0.5;       // added to the best-matching level
  double potential_limit = 0.2;   // upper clamp of the level-change potential
  double potential_hold = 0.05;   // growth per cycle without a level change
  int window = 5;                 // observed samples compared per update
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Opponent position observed at an absolute simulation step.
struct Observation {
  int step = 0;
  Point2 position;
};

/// Opponent level predictions made at one decision cycle.
struct PredictionCache {
  int step = 0;  // absolute step of the predictions' first sample
  std::array<Trajectory, kOpponentLevels> by_level;
};

struct BeliefState {
  std::array<double, kOpponentLevels> beliefs{};
  std::array<double, kOpponentLevels> prev_beliefs{};
  double potential = 0.0;
  std::optional<PredictionCache> cached_predictions;
  EstimationParams params;
};

class InsufficientHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Even beliefs, potential at its limit, nothing cached.
BeliefState InitBeliefs(const EstimationParams& params = {});

/// Estimated opponent level: argmax belief, ties to the lowest level.
int EstimatedLevel(const std::array<double, kOpponentLevels>& beliefs);

/// Sum of pointwise Euclidean distances between the observations and a
/// prediction indexed by absolute step.
double WindowDistance(std::span<const Observation> observed,
                      const Trajectory& prediction, int prediction_step);

struct BeliefUpdate {
  BeliefState state;
  int matched_level = 0;
  std::array<double, kOpponentLevels> distances{};
};

/// Rewards the level whose cached prediction best matches the last
/// `window` observations, then renormalizes. prev_beliefs is set to the
/// beliefs held before the update.
///
/// Throws InsufficientHistory when fewer than `window` observations are
/// given or the cache does not cover them.
BeliefUpdate UpdateBeliefs(const BeliefState& state,
                           std::span<const Observation> observed);

/// Drops the potential by its limit when the estimated level changed since
/// prev_beliefs, otherwise grows it; clamps to [0, limit].
BeliefState UpdatePotential(const BeliefState& state);

struct MixedSelection {
  Trajectory best;
  Trajectory failsafe;
  Trajectory mixed;
  int estimated_level = 0;  // k*
  int failsafe_level = 0;   // k_fail
  bool degenerate = false;  // k_fail == k*
};

/// Blends the ego's response to the likeliest opponent level with its
/// response to the least likely one, weighted by the potential.
MixedSelection SelectMixedTrajectory(const BeliefState& state,
                                     const LevelPolicy& ego_policy);

}  // namespace duel
