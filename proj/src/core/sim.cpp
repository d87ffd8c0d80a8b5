#include "duel/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace duel {
namespace {

int ExactSteps(double duration, double sample_time, const char* what) {
  const double steps = duration / sample_time;
  if (std::abs(steps - std::round(steps)) > 1e-9 || steps < 1.0) {
    throw std::invalid_argument(std::string("sim: ") + what +
                                " must be a positive multiple of sample_time");
  }
  return static_cast<int>(std::lround(steps));
}

}  // namespace

std::string ToString(EgoController c) {
  return c == EgoController::kMixing ? "mixing" : "conventional";
}

std::string ToString(Outcome o) {
  return o == Outcome::kBlockingSuccess ? "blocking_success" : "overtaking_success";
}

EgoController ParseController(const std::string& name) {
  if (name == "mixing") return EgoController::kMixing;
  if (name == "conventional") return EgoController::kConventional;
  throw std::invalid_argument("unknown controller '" + name +
                              "' (expected mixing or conventional)");
}

int SimConfig::CycleSteps() const {
  return ExactSteps(decision_cycle, sample_time, "decision_cycle");
}

int SimConfig::EpisodeSteps() const {
  return ExactSteps(episode_limit, sample_time, "episode_limit");
}

PlanningParams SimConfig::Planning(const RobotLimits& limits) const {
  PlanningParams p;
  p.a_set_values = a_set_values;
  p.y_target_values = y_target_values;
  p.y_min = track_min;
  p.y_max = track_max;
  p.horizon = plan_horizon;
  p.sample_time = sample_time;
  p.v_max = limits.v_max;
  return p;
}

TrackerConfig SimConfig::Tracker(const RobotLimits& limits) const {
  TrackerConfig t;
  t.horizon = tracker_horizon;
  t.dt = sample_time;
  t.state_weights = tracker_state_weights;
  t.input_weights = tracker_input_weights;
  t.limits = limits;
  t.max_iterations = tracker_iterations;
  return t;
}

void SimConfig::Validate() const {
  if (!(sample_time > 0.0)) throw std::invalid_argument("sim: sample_time must be > 0");
  CycleSteps();
  EpisodeSteps();
  ExactSteps(plan_horizon, sample_time, "plan_horizon");
  if (plan_horizon < decision_cycle) {
    throw std::invalid_argument("sim: plan_horizon shorter than decision_cycle");
  }
  Planning(ego_limits).Validate();
  Planning(opponent_limits).Validate();
  Tracker(ego_limits).Validate();
  Tracker(opponent_limits).Validate();
  if (!(footprint > 0.0)) throw std::invalid_argument("sim: footprint must be > 0");
  if (max_initial_gap < 0.0) throw std::invalid_argument("sim: negative max_initial_gap");
  if (opponent_y_min > opponent_y_max || opponent_y_min < track_min ||
      opponent_y_max > track_max || ego_start_y < track_min || ego_start_y > track_max) {
    throw std::invalid_argument("sim: initial lateral positions outside the track");
  }
  if (ego_initial_speed < 0.0 || ego_initial_speed > ego_limits.v_max ||
      opponent_initial_speed < 0.0 || opponent_initial_speed > opponent_limits.v_max) {
    throw std::invalid_argument("sim: initial speed outside [0, v_max]");
  }
  if (max_level < 3) {
    throw std::invalid_argument("sim: max_level must be >= 3 (ego plays levels 1..3)");
  }
  if (estimation.window < 1 || estimation.window > ExactSteps(plan_horizon, sample_time, "plan_horizon")) {
    throw std::invalid_argument("sim: estimation window must fit in the plan horizon");
  }
  if (estimation.potential_limit < 0.0 || estimation.potential_limit > 1.0) {
    throw std::invalid_argument("sim: potential_limit must lie in [0, 1]");
  }
}

bool DetectCollision(const KinodynamicState& ego,
                     const KinodynamicState& opponent, double footprint) {
  return std::abs(ego.x - opponent.x) < footprint &&
         std::abs(ego.y - opponent.y) < footprint;
}

double EpisodeRecord::MeanDecisionMs() const {
  if (cycles.empty()) return 0.0;
  double total = 0.0;
  for (const CycleRecord& c : cycles) total += c.decision_ms;
  return total / cycles.size();
}

std::vector<ControlInput> EpisodeRecord::OpponentInputs() const {
  std::vector<ControlInput> out;
  for (std::size_t i = 1; i < samples.size(); ++i) out.push_back(samples[i].opponent_input);
  return out;
}

Episode::Episode(const SimConfig& config, EgoController controller,
                 OpponentModel opponent, std::uint64_t seed)
    : config_(config),
      controller_(controller),
      opponent_model_(std::move(opponent)),
      ego_plan_params_(config.Planning(config.ego_limits)),
      opp_plan_params_(config.Planning(config.opponent_limits)),
      rng_(seed),
      ego_tracker_(config.Tracker(config.ego_limits)),
      opp_tracker_(config.Tracker(config.opponent_limits)),
      belief_(InitBeliefs(config.estimation)) {
  config_.Validate();
  if (auto* sw = std::get_if<LevelSwitcher>(&opponent_model_)) {
    if (sw->schedule.empty()) {
      sw->schedule = RandomSwitchSchedule(sw->schedule_seed.value_or(seed)).schedule;
    }
  }

  record_.seed = seed;
  record_.controller = ToString(controller);
  record_.opponent = OpponentName(opponent_model_);

  ego_.x = config_.ego_start_x;
  ego_.y = config_.ego_start_y;
  ego_.vx = config_.ego_initial_speed;

  const double gap = rng_.Uniform(0.0, config_.max_initial_gap);
  opp_.x = config_.ego_start_x - gap;
  opp_.y = rng_.Uniform(config_.opponent_y_min, config_.opponent_y_max);
  opp_.vx = config_.opponent_initial_speed;

  RecordSample({}, {}, false, false, false);
  Classify();
}

KinodynamicState Episode::PlanningState(const KinodynamicState& s) const {
  KinodynamicState out = s;
  if (config_.acceleration_seed == AccelerationSeed::kZero) {
    out.ax = 0.0;
    out.ay = 0.0;
  }
  return out;
}

void Episode::Decide() {
  const auto started = std::chrono::steady_clock::now();

  const CandidateSet ego_set = BuildCandidates(PlanningState(ego_), ego_plan_params_);
  const CandidateSet opp_set = BuildCandidates(PlanningState(opp_), opp_plan_params_);
  const RewardMatrix matrix = BuildRewardMatrix(ego_set, opp_set, config_.reward);
  const FrozenRewards frozen = ComputeFrozenRewards(
      ego_set, opp_set, ego_, opp_, ego_plan_params_, config_.reward);
  const LevelPolicy policy =
      ComputeAllLevels(ego_set, opp_set, matrix, frozen, config_.max_level);

  CycleRecord cycle;
  cycle.step = step_;
  cycle.t = time();

  // Estimation over the cycle that just elapsed.
  const int window = belief_.params.window;
  bool updated = false;
  if (belief_.cached_predictions && step_ >= window) {
    std::vector<Observation> observed;
    for (int s = step_ - window + 1; s <= step_; ++s) {
      const KinodynamicState& o = record_.samples[s].opponent;
      observed.push_back({s, {o.x, o.y}});
    }
    try {
      BeliefUpdate upd = UpdateBeliefs(belief_, observed);
      belief_ = std::move(upd.state);
      cycle.matched_level = upd.matched_level;
      updated = true;
    } catch (const InsufficientHistory&) {
    }
  }
  if (!updated) belief_.prev_beliefs = belief_.beliefs;
  belief_ = UpdatePotential(belief_);
  if (controller_ == EgoController::kConventional) belief_.potential = 0.0;

  const MixedSelection sel = SelectMixedTrajectory(belief_, policy);

  PredictionCache cache;
  cache.step = step_;
  for (int k = 0; k < kOpponentLevels; ++k) {
    cache.by_level[k] = policy.OpponentTrajectory(k);
  }
  belief_.cached_predictions = std::move(cache);

  ego_plan_ = sel.mixed;
  ego_plan_step_ = step_;

  const auto finished = std::chrono::steady_clock::now();
  cycle.decision_ms =
      std::chrono::duration<double, std::milli>(finished - started).count();

  cycle.estimation_ran = updated;
  cycle.beliefs = belief_.beliefs;
  cycle.potential = belief_.potential;
  cycle.estimated_level = sel.estimated_level;
  cycle.failsafe_level = sel.failsafe_level;
  cycle.degenerate = sel.degenerate;
  for (const auto& i : policy.ego) cycle.ego_levels.push_back(*i);
  for (const auto& j : policy.opponent) cycle.opponent_levels.push_back(*j);
  cycle.best_index = policy.ego[sel.estimated_level + 1].value();
  cycle.failsafe_index = policy.ego[sel.failsafe_level + 1].value();
  for (const Trajectory& t : ego_set.trajectories) cycle.ego_candidates.push_back(*t.meta);
  cycle.best = sel.best;
  cycle.failsafe = sel.failsafe;
  cycle.mixed = sel.mixed;

  // Opponents that reason with levels replan on the same cycle.
  std::optional<int> level;
  if (const auto* c = std::get_if<ConstantLevel>(&opponent_model_)) level = c->level;
  if (const auto* s = std::get_if<LevelSwitcher>(&opponent_model_)) level = s->LevelAt(time());
  if (level) {
    current_opp_level_ = *level;
    opp_plan_ = policy.OpponentTrajectory(*level);
    opp_plan_step_ = step_;
    cycle.opponent_plan_level = *level;
  }

  record_.cycles.push_back(std::move(cycle));
}

ControlInput Episode::OpponentInput(std::optional<ControlInput> external_input) {
  if (const auto* ext = std::get_if<External>(&opponent_model_)) {
    ControlInput u;
    if (external_input) {
      u = *external_input;
    } else if (step_ < static_cast<int>(ext->inputs.size())) {
      u = ext->inputs[step_];
    }
    if (!std::isfinite(u.v) || !std::isfinite(u.omega)) u = {};
    return ClampInput(u, config_.opponent_limits);
  }
  if (std::holds_alternative<RandomCandidate>(opponent_model_)) {
    const CandidateSet set = BuildCandidates(PlanningState(opp_), opp_plan_params_);
    opp_plan_ = set[rng_.Index(static_cast<int>(set.size()))];
    opp_plan_step_ = step_;
  }
  const auto refs =
      ReferenceFromTrajectory(opp_plan_, step_ - opp_plan_step_,
                              config_.tracker_horizon, config_.sample_time,
                              config_.opponent_limits);
  return opp_tracker_.Solve(opp_, refs).input;
}

void Episode::Advance(std::optional<ControlInput> external_input) {
  if (finished_) return;
  try {
    if (step_ % config_.CycleSteps() == 0) Decide();

    const auto ego_refs =
        ReferenceFromTrajectory(ego_plan_, step_ - ego_plan_step_,
                                config_.tracker_horizon, config_.sample_time,
                                config_.ego_limits);
    const TrackerSolution ego_sol = ego_tracker_.Solve(ego_, ego_refs);
    const ControlInput opp_u = OpponentInput(external_input);

    ego_ = Step(ego_, ego_sol.input, config_.sample_time);
    opp_ = Step(opp_, opp_u, config_.sample_time);
    ++step_;

    auto clamp_lateral = [&](KinodynamicState& s) {
      const double y = std::clamp(s.y, config_.track_min, config_.track_max);
      const bool clamped = y != s.y;
      s.y = y;
      return clamped;
    };
    const bool ego_clamped = clamp_lateral(ego_);
    const bool opp_clamped = clamp_lateral(opp_);
    RecordSample(ego_sol.input, opp_u, ego_clamped, opp_clamped, ego_sol.fallback);
    Classify();
  } catch (const std::exception& e) {
    Abort(e.what());
  }
}

void Episode::Run() {
  while (!finished_) Advance();
}

void Episode::RecordSample(const ControlInput& ego_u, const ControlInput& opp_u,
                           bool ego_clamped, bool opp_clamped, bool ego_fallback) {
  SampleRecord s;
  s.step = step_;
  s.t = time();
  s.ego = ego_;
  s.opponent = opp_;
  s.ego_input = ego_u;
  s.opponent_input = opp_u;
  s.ego_clamped = ego_clamped;
  s.opponent_clamped = opp_clamped;
  s.ego_fallback = ego_fallback;
  record_.clamp_events += int{ego_clamped} + int{opp_clamped};
  record_.samples.push_back(s);
}

void Episode::Classify() {
  // A collision at a sample ends the race before any pass there counts.
  if (DetectCollision(ego_, opp_, config_.footprint)) {
    record_.collision = true;
    record_.outcome = Outcome::kBlockingSuccess;
    finished_ = true;
  } else if (opp_.x > ego_.x) {
    record_.outcome = Outcome::kOvertakingSuccess;
    finished_ = true;
  } else if (step_ >= config_.EpisodeSteps()) {
    record_.outcome = Outcome::kBlockingSuccess;
    finished_ = true;
  }
  record_.end_step = step_;
  record_.end_time = time();
}

void Episode::Abort(const std::string& reason) {
  record_.aborted = true;
  record_.abort_reason = reason;
  record_.end_step = step_;
  record_.end_time = time();
  finished_ = true;
}

EpisodeRecord RunEpisode(const SimConfig& config, EgoController controller,
                         const OpponentModel& opponent, std::uint64_t seed) {
  Episode episode(config, controller, opponent, seed);
  episode.Run();
  return episode.TakeRecord();
}

}  // namespace duel
