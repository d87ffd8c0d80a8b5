#include "duel/reward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace duel {
namespace {

void CheckGrids(const Trajectory& a, const Trajectory& b) {
  if (a.samples.size() != b.samples.size() || a.samples.empty()) {
    throw std::invalid_argument("reward: trajectories sampled on different grids");
  }
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    if (std::abs(a.samples[i].t - b.samples[i].t) > 1e-9) {
      throw std::invalid_argument("reward: trajectories sampled on different grids");
    }
  }
}

std::string Label(const Trajectory& t, std::size_t index) {
  if (!t.meta) return "c" + std::to_string(index);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "a=%g;y=%g", t.meta->a_set, t.meta->y_target);
  return buf;
}

}  // namespace

RewardComponents ComputeRewardComponents(const Trajectory& ego,
                                         const Trajectory& opponent,
                                         double track_width) {
  CheckGrids(ego, opponent);
  RewardComponents c;
  const double x0 = opponent.samples.front().x;
  for (std::size_t j = 0; j < opponent.samples.size(); ++j) {
    const TrajectorySample& o = opponent.samples[j];
    const TrajectorySample& e = ego.samples[j];
    c.position += o.x - x0;
    c.relative += o.x - e.x;
    c.block += std::min(std::abs(o.y - e.y), track_width);
  }
  return c;
}

double Combine(const RewardComponents& c, const RewardWeights& w) {
  return w.position * c.position + w.relative * c.relative + w.block * c.block;
}

double HolisticReward(const Trajectory& ego, const Trajectory& opponent,
                      const RewardParams& params) {
  return Combine(ComputeRewardComponents(ego, opponent, params.track_width),
                 params.weights);
}

double EgoReward(const Trajectory& ego, const Trajectory& opponent,
                 const RewardParams& params) {
  return -HolisticReward(ego, opponent, params);
}

RewardMatrix BuildRewardMatrix(const CandidateSet& ego_set,
                               const CandidateSet& opp_set,
                               const RewardParams& params) {
  Eigen::MatrixXd values(ego_set.size(), opp_set.size());
  for (std::size_t i = 0; i < ego_set.size(); ++i) {
    for (std::size_t j = 0; j < opp_set.size(); ++j) {
      values(i, j) = HolisticReward(ego_set[i], opp_set[j], params);
    }
  }
  return RewardMatrix(std::move(values));
}

std::vector<double> RewardsVsFixedOpponent(const CandidateSet& ego_set,
                                           const Trajectory& opponent,
                                           const RewardParams& params) {
  std::vector<double> out;
  out.reserve(ego_set.size());
  for (const Trajectory& ego : ego_set.trajectories) {
    out.push_back(HolisticReward(ego, opponent, params));
  }
  return out;
}

std::vector<double> RewardsVsFixedEgo(const Trajectory& ego,
                                      const CandidateSet& opp_set,
                                      const RewardParams& params) {
  std::vector<double> out;
  out.reserve(opp_set.size());
  for (const Trajectory& opp : opp_set.trajectories) {
    out.push_back(HolisticReward(ego, opp, params));
  }
  return out;
}

void WriteMatrixCsv(std::ostream& os, const RewardMatrix& matrix,
                    const CandidateSet& ego_set, const CandidateSet& opp_set) {
  os << "ego\\opponent";
  for (std::size_t j = 0; j < opp_set.size(); ++j) os << ',' << Label(opp_set[j], j);
  os << '\n';
  for (int i = 0; i < matrix.rows(); ++i) {
    os << Label(ego_set[i], i);
    for (int j = 0; j < matrix.cols(); ++j) os << ',' << matrix.Opponent(i, j);
    os << '\n';
  }
}

}  // namespace duel
