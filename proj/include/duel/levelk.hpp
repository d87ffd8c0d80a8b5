#pragma once

#include <optional>
#include <span>
#include <vector>

#include "duel/reward.hpp"
#include "duel/trajectory.hpp"

namespace duel {

enum class Role { kEgo, kOpponent };

/// Best-response candidate indices by reasoning level.
///
/// ego[k] holds the ego's level-k choice for k = 0..max_level (level 0 is
/// only used to seed the opponent's level 1); opponent[k] holds the
/// opponent's choice for k = 0..max_level-1.
struct LevelPolicy {
  std::vector<std::optional<int>> ego;
  std::vector<std::optional<int>> opponent;
  std::vector<Trajectory> ego_trajectories;       // parallel to ego
  std::vector<Trajectory> opponent_trajectories;  // parallel to opponent

  std::optional<int> Index(Role role, int level) const;
  const Trajectory& EgoTrajectory(int level) const;
  const Trajectory& OpponentTrajectory(int level) const;
};

/// Opponent rewards of each candidate while the other robot sits still.
struct FrozenRewards {
  std::vector<double> ego_candidates;       // vs the frozen opponent
  std::vector<double> opponent_candidates;  // vs the frozen ego
};

/// Argmax with ties going to the lowest index.
int ArgmaxLowest(std::span<const double> values);
/// Argmin with ties going to the lowest index.
int ArgminLowest(std::span<const double> values);

/// Level-0 choice. The vector always holds opponent rewards; the ego
/// maximizes their negation.
int Level0Best(std::span<const double> rewards_vs_frozen, Role role);

/// Level-k (k >= 1) best response against the other role's level-(k-1)
/// entry in `below`. Throws std::invalid_argument if that entry is absent.
int LevelKBest(const RewardMatrix& matrix, int level, Role role,
               const LevelPolicy& below);

FrozenRewards ComputeFrozenRewards(const CandidateSet& ego_set,
                                   const CandidateSet& opp_set,
                                   const KinodynamicState& ego_now,
                                   const KinodynamicState& opp_now,
                                   const PlanningParams& grid,
                                   const RewardParams& params);

/// Fills ego levels 0..max_level and opponent levels 0..max_level-1.
LevelPolicy ComputeAllLevels(const CandidateSet& ego_set,
                             const CandidateSet& opp_set,
                             const RewardMatrix& matrix,
                             const FrozenRewards& frozen, int max_level = 3);

}  // namespace duel
