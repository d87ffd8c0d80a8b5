#include "duel/levelk.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace duel {

std::optional<int> LevelPolicy::Index(Role role, int level) const {
  const auto& v = role == Role::kEgo ? ego : opponent;
  if (level < 0 || level >= static_cast<int>(v.size())) return std::nullopt;
  return v[level];
}

const Trajectory& LevelPolicy::EgoTrajectory(int level) const {
  return ego_trajectories.at(level);
}

const Trajectory& LevelPolicy::OpponentTrajectory(int level) const {
  return opponent_trajectories.at(level);
}

int ArgmaxLowest(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty range");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

int ArgminLowest(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmin of an empty range");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

int Level0Best(std::span<const double> rewards_vs_frozen, Role role) {
  for (double r : rewards_vs_frozen) {
    if (!std::isfinite(r)) throw std::invalid_argument("Level0Best: non-finite reward");
  }
  // Maximizing -r is minimizing r; ties still go low.
  return role == Role::kEgo ? ArgminLowest(rewards_vs_frozen)
                            : ArgmaxLowest(rewards_vs_frozen);
}

int LevelKBest(const RewardMatrix& matrix, int level, Role role,
               const LevelPolicy& below) {
  if (level < 1) throw std::invalid_argument("LevelKBest: level must be >= 1");
  const Role other = role == Role::kEgo ? Role::kOpponent : Role::kEgo;
  const std::optional<int> fixed = below.Index(other, level - 1);
  if (!fixed) {
    throw std::invalid_argument("LevelKBest: missing level-" +
                                std::to_string(level - 1) + " response");
  }
  if (role == Role::kEgo) {
    int best = 0;
    for (int i = 1; i < matrix.rows(); ++i) {
      if (matrix.Ego(i, *fixed) > matrix.Ego(best, *fixed)) best = i;
    }
    return best;
  }
  int best = 0;
  for (int j = 1; j < matrix.cols(); ++j) {
    if (matrix.Opponent(*fixed, j) > matrix.Opponent(*fixed, best)) best = j;
  }
  return best;
}

FrozenRewards ComputeFrozenRewards(const CandidateSet& ego_set,
                                   const CandidateSet& opp_set,
                                   const KinodynamicState& ego_now,
                                   const KinodynamicState& opp_now,
                                   const PlanningParams& grid,
                                   const RewardParams& params) {
  FrozenRewards out;
  out.ego_candidates = RewardsVsFixedOpponent(
      ego_set, StationaryTrajectory(opp_now, grid), params);
  out.opponent_candidates = RewardsVsFixedEgo(
      StationaryTrajectory(ego_now, grid), opp_set, params);
  return out;
}

LevelPolicy ComputeAllLevels(const CandidateSet& ego_set,
                             const CandidateSet& opp_set,
                             const RewardMatrix& matrix,
                             const FrozenRewards& frozen, int max_level) {
  if (max_level < 1) throw std::invalid_argument("ComputeAllLevels: max_level < 1");
  if (matrix.rows() != static_cast<int>(ego_set.size()) ||
      matrix.cols() != static_cast<int>(opp_set.size()) ||
      frozen.ego_candidates.size() != ego_set.size() ||
      frozen.opponent_candidates.size() != opp_set.size()) {
    throw std::invalid_argument("ComputeAllLevels: inconsistent sizes");
  }
  LevelPolicy policy;
  policy.ego.assign(max_level + 1, std::nullopt);
  policy.opponent.assign(max_level, std::nullopt);

  policy.ego[0] = Level0Best(frozen.ego_candidates, Role::kEgo);
  policy.opponent[0] = Level0Best(frozen.opponent_candidates, Role::kOpponent);
  for (int k = 1; k <= max_level; ++k) {
    policy.ego[k] = LevelKBest(matrix, k, Role::kEgo, policy);
    if (k < max_level) {
      policy.opponent[k] = LevelKBest(matrix, k, Role::kOpponent, policy);
    }
  }

  for (const auto& i : policy.ego) policy.ego_trajectories.push_back(ego_set[*i]);
  for (const auto& j : policy.opponent) {
    policy.opponent_trajectories.push_back(opp_set[*j]);
  }
  return policy;
}

}  // namespace duel
