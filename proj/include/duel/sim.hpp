#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "duel/estimation.hpp"
#include "duel/kinematics.hpp"
#include "duel/levelk.hpp"
#include "duel/opponent.hpp"
#include "duel/reward.hpp"
#include "duel/rng.hpp"
#include "duel/tracking.hpp"
#include "duel/trajectory.hpp"

namespace duel {

enum class AccelerationSeed { kFiniteDifference, kZero };

enum class EgoController { kMixing, kConventional };

enum class Outcome { kBlockingSuccess, kOvertakingSuccess };

std::string ToString(EgoController c);
std::string ToString(Outcome o);
EgoController ParseController(const std::string& name);

struct SimConfig {
  double sample_time = 0.2;
  double decision_cycle = 1.0;
  double episode_limit = 60.0;
  double track_min = 0.65;
  double track_max = 2.35;
  double footprint = 0.3;  // side of the square robot footprint [m]
  RobotLimits ego_limits{0.6, 2.0};
  RobotLimits opponent_limits{0.61, 2.0};

  // Initial conditions.
  double ego_start_x = 2.0;
  double ego_start_y = 1.5;
  double ego_initial_speed = 0.5;
  double opponent_initial_speed = 0.5;
  double max_initial_gap = 2.0;
  double opponent_y_min = 1.0;
  double opponent_y_max = 2.0;

  // Candidate grid.
  std::vector<double> a_set_values{-0.05, 0.0, 0.05};
  std::vector<double> y_target_values{1.0, 1.5, 2.0};
  double plan_horizon = 5.0;
  AccelerationSeed acceleration_seed = AccelerationSeed::kFiniteDifference;

  RewardParams reward;
  EstimationParams estimation;
  int max_level = 3;

  // Tracker (limits come from the robot).
  int tracker_horizon = 20;
  std::array<double, 3> tracker_state_weights{10.0, 10.0, 1.0};
  std::array<double, 2> tracker_input_weights{1.0, 1.0};
  int tracker_iterations = 8;

  int CycleSteps() const;
  int EpisodeSteps() const;
  PlanningParams Planning(const RobotLimits& limits) const;
  TrackerConfig Tracker(const RobotLimits& limits) const;
  /// Throws std::invalid_argument describing the first violated constraint.
  void Validate() const;
};

/// Axis-aligned square footprints overlap (strictly).
bool DetectCollision(const KinodynamicState& ego,
                     const KinodynamicState& opponent, double footprint);

struct SampleRecord {
  int step = 0;
  double t = 0.0;
  KinodynamicState ego;
  KinodynamicState opponent;
  // Inputs applied over the interval ending at this sample.
  ControlInput ego_input;
  ControlInput opponent_input;
  bool ego_clamped = false;
  bool opponent_clamped = false;
  bool ego_fallback = false;
};

struct CycleRecord {
  int step = 0;
  double t = 0.0;
  std::array<double, kOpponentLevels> beliefs{};
  double potential = 0.0;
  bool estimation_ran = false;
  std::optional<int> matched_level;
  int estimated_level = 0;
  int failsafe_level = 0;
  bool degenerate = false;
  std::vector<int> ego_levels;       // candidate index per ego level 0..K
  std::vector<int> opponent_levels;  // candidate index per opponent level 0..K-1
  int best_index = 0;
  int failsafe_index = 0;
  std::vector<CandidateMeta> ego_candidates;
  std::optional<int> opponent_plan_level;  // level the opponent played
  Trajectory best;
  Trajectory failsafe;
  Trajectory mixed;
  double decision_ms = 0.0;  // wall clock; excluded from determinism
};

struct EpisodeRecord {
  std::uint64_t seed = 0;
  std::string controller;
  std::string opponent;
  std::vector<SampleRecord> samples;
  std::vector<CycleRecord> cycles;
  Outcome outcome = Outcome::kBlockingSuccess;
  bool collision = false;
  bool aborted = false;
  std::string abort_reason;
  int end_step = 0;
  double end_time = 0.0;
  int clamp_events = 0;

  double MeanDecisionMs() const;
  /// Opponent inputs actually applied, one per step; replaying them
  /// through an External opponent reproduces the episode.
  std::vector<ControlInput> OpponentInputs() const;
};

/// One duel advanced one sample at a time. Deterministic given
/// (config, controller, opponent, seed) and the external inputs supplied.
class Episode {
 public:
  Episode(const SimConfig& config, EgoController controller,
          OpponentModel opponent, std::uint64_t seed);

  bool finished() const { return finished_; }
  int step() const { return step_; }
  double time() const { return step_ * config_.sample_time; }
  const KinodynamicState& ego() const { return ego_; }
  const KinodynamicState& opponent() const { return opp_; }
  const EpisodeRecord& record() const { return record_; }
  EpisodeRecord TakeRecord() { return std::move(record_); }
  const CycleRecord* last_cycle() const {
    return record_.cycles.empty() ? nullptr : &record_.cycles.back();
  }
  const BeliefState& beliefs() const { return belief_; }

  /// Advances one sample. For External opponents `external_input`
  /// overrides the stored stream; it is ignored otherwise.
  void Advance(std::optional<ControlInput> external_input = std::nullopt);

  /// Runs to completion.
  void Run();

 private:
  void Decide();
  ControlInput OpponentInput(std::optional<ControlInput> external_input);
  KinodynamicState PlanningState(const KinodynamicState& s) const;
  void RecordSample(const ControlInput& ego_u, const ControlInput& opp_u,
                    bool ego_clamped, bool opp_clamped, bool ego_fallback);
  void Classify();
  void Abort(const std::string& reason);

  SimConfig config_;
  EgoController controller_;
  OpponentModel opponent_model_;
  PlanningParams ego_plan_params_;
  PlanningParams opp_plan_params_;
  Rng rng_;
  MpcTracker ego_tracker_;
  MpcTracker opp_tracker_;
  BeliefState belief_;

  KinodynamicState ego_;
  KinodynamicState opp_;
  int step_ = 0;
  bool finished_ = false;

  Trajectory ego_plan_;
  int ego_plan_step_ = 0;
  Trajectory opp_plan_;
  int opp_plan_step_ = 0;
  int current_opp_level_ = 0;

  EpisodeRecord record_;
};

EpisodeRecord RunEpisode(const SimConfig& config, EgoController controller,
                         const OpponentModel& opponent, std::uint64_t seed);

}  // namespace duel
