#include "duel/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace duel {

BeliefState InitBeliefs(const EstimationParams& params) {
  BeliefState state;
  state.beliefs.fill(1.0 / kOpponentLevels);
  state.prev_beliefs = state.beliefs;
  state.potential = params.potential_limit;
  state.params = params;
  return state;
}

int EstimatedLevel(const std::array<double, kOpponentLevels>& beliefs) {
  return ArgmaxLowest(beliefs);
}

double WindowDistance(std::span<const Observation> observed,
                      const Trajectory& prediction, int prediction_step) {
  double total = 0.0;
  for (const Observation& obs : observed) {
    const int index = obs.step - prediction_step;
    if (index < 0 || index >= static_cast<int>(prediction.samples.size())) {
      throw InsufficientHistory("prediction does not cover step " +
                                std::to_string(obs.step));
    }
    const TrajectorySample& p = prediction.samples[index];
    total += std::hypot(obs.position.x - p.x, obs.position.y - p.y);
  }
  return total;
}

BeliefUpdate UpdateBeliefs(const BeliefState& state,
                           std::span<const Observation> observed) {
  const int window = state.params.window;
  if (static_cast<int>(observed.size()) < window) {
    throw InsufficientHistory("fewer observations than the estimation window");
  }
  if (!state.cached_predictions) {
    throw InsufficientHistory("no cached level predictions");
  }
  const auto recent = observed.last(window);
  const PredictionCache& cache = *state.cached_predictions;

  BeliefUpdate out;
  for (int k = 0; k < kOpponentLevels; ++k) {
    out.distances[k] = WindowDistance(recent, cache.by_level[k], cache.step);
  }
  out.matched_level = ArgminLowest(out.distances);

  out.state = state;
  out.state.prev_beliefs = state.beliefs;
  auto& b = out.state.beliefs;
  b[out.matched_level] += state.params.belief_step;
  double sum = 0.0;
  for (double v : b) sum += v;
  for (double& v : b) v /= sum;
  return out;
}

BeliefState UpdatePotential(const BeliefState& state) {
  BeliefState out = state;
  const bool changed =
      EstimatedLevel(state.beliefs) != EstimatedLevel(state.prev_beliefs);
  const double delta =
      changed ? -state.params.potential_limit : state.params.potential_hold;
  out.potential =
      std::clamp(state.potential + delta, 0.0, state.params.potential_limit);
  return out;
}

MixedSelection SelectMixedTrajectory(const BeliefState& state,
                                     const LevelPolicy& ego_policy) {
  MixedSelection sel;
  sel.estimated_level = EstimatedLevel(state.beliefs);
  sel.failsafe_level = ArgminLowest(state.beliefs);
  sel.degenerate = sel.estimated_level == sel.failsafe_level;
  sel.best = ego_policy.EgoTrajectory(sel.estimated_level + 1);
  sel.failsafe = ego_policy.EgoTrajectory(sel.failsafe_level + 1);
  sel.mixed = Blend(sel.best, sel.failsafe, state.potential);
  return sel;
}

}  // namespace duel
