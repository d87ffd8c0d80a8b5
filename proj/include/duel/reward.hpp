#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "duel/trajectory.hpp"

namespace duel {

struct RewardWeights {
  double position = 1.0;
  double relative = 0.5;
  double block = 1.0;
};

struct RewardParams {
  RewardWeights weights;
  double track_width = 0.3;  // cap on the lateral-gap term [m]
};

struct RewardComponents {
  double position = 0.0;  // opponent progress from its first sample
  double relative = 0.0;  // opponent lead over the ego
  double block = 0.0;     // capped lateral separation
};

/// Opponent reward terms summed over every sample of the shared grid.
/// Throws std::invalid_argument if the grids differ.
RewardComponents ComputeRewardComponents(const Trajectory& ego,
                                         const Trajectory& opponent,
                                         double track_width);

double Combine(const RewardComponents& c, const RewardWeights& w);

/// The opponent's weighted reward for one trajectory pair.
double HolisticReward(const Trajectory& ego, const Trajectory& opponent,
                      const RewardParams& params);

/// Zero-sum: the ego is paid the negated opponent reward.
double EgoReward(const Trajectory& ego, const Trajectory& opponent,
                 const RewardParams& params);

/// Opponent rewards; rows are ego candidates, columns opponent candidates.
class RewardMatrix {
 public:
  RewardMatrix() = default;
  explicit RewardMatrix(Eigen::MatrixXd opponent_rewards)
      : values_(std::move(opponent_rewards)) {}

  int rows() const { return static_cast<int>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }
  double Opponent(int ego_index, int opp_index) const {
    return values_(ego_index, opp_index);
  }
  double Ego(int ego_index, int opp_index) const {
    return -values_(ego_index, opp_index);
  }
  const Eigen::MatrixXd& values() const { return values_; }

 private:
  Eigen::MatrixXd values_;
};

RewardMatrix BuildRewardMatrix(const CandidateSet& ego_set,
                               const CandidateSet& opp_set,
                               const RewardParams& params);

/// Opponent reward of each ego candidate against a fixed opponent
/// trajectory (index = ego candidate).
std::vector<double> RewardsVsFixedOpponent(const CandidateSet& ego_set,
                                           const Trajectory& opponent,
                                           const RewardParams& params);

/// Opponent reward of each opponent candidate against a fixed ego
/// trajectory (index = opponent candidate).
std::vector<double> RewardsVsFixedEgo(const Trajectory& ego,
                                      const CandidateSet& opp_set,
                                      const RewardParams& params);

/// Debug dump: header row of opponent candidate labels, one row per ego
/// candidate.
void WriteMatrixCsv(std::ostream& os, const RewardMatrix& matrix,
                    const CandidateSet& ego_set, const CandidateSet& opp_set);

}  // namespace duel
