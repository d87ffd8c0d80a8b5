#pragma once

#include <array>
#include <optional>
#include <vector>

#include "duel/kinematics.hpp"

namespace duel {

/// Quintic per axis; a[i] / b[i] multiply t^i.
struct QuinticCoefficients {
  std::array<double, 6> a{};  // longitudinal
  std::array<double, 6> b{};  // lateral
};

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// The (acceleration, lateral target) pair a candidate was generated from.
struct CandidateMeta {
  double a_set = 0.0;
  double y_target = 0.0;
  bool lateral_clamped = false;  // some sample was pulled back into the track
};

struct Trajectory {
  std::optional<QuinticCoefficients> coeffs;  // absent for blended / observed
  std::vector<TrajectorySample> samples;
  std::optional<CandidateMeta> meta;
};

struct PlanningParams {
  std::vector<double> a_set_values{-0.05, 0.0, 0.05};
  std::vector<double> y_target_values{1.0, 1.5, 2.0};
  double y_min = 0.65;
  double y_max = 2.35;
  double horizon = 5.0;      // t_T [s]
  double sample_time = 0.2;  // [s]
  double v_max = 0.6;

  /// Samples per trajectory, including t = 0.
  int NumSamples() const;
  void Validate() const;
};

/// Candidates in canonical order: a_set major, y_target minor, both
/// ascending.
struct CandidateSet {
  std::vector<Trajectory> trajectories;

  std::size_t size() const { return trajectories.size(); }
  const Trajectory& operator[](std::size_t i) const { return trajectories[i]; }
};

/// Value (order 0), first or second derivative of sum c[i] t^i.
double EvalPolynomial(const std::array<double, 6>& c, double t, int order = 0);

/// Terminal boundary state for one (a_set, y_target) pair. The speed
/// profile accelerates at a_set until it hits 0 or v_max, then holds.
/// Throws std::invalid_argument if y_target is off the track.
KinodynamicState TerminalState(const KinodynamicState& initial, double a_set,
                               double y_target, const PlanningParams& params);

/// Unique quintic per axis matching position, velocity and acceleration at
/// t = 0 and t = horizon.
QuinticCoefficients FitQuintic(const KinodynamicState& initial,
                               const KinodynamicState& terminal,
                               double horizon);

/// Samples a quintic at params.sample_time over [0, horizon]. Lateral
/// samples are clamped into the track and the clamp flagged in meta.
Trajectory SampleQuintic(const QuinticCoefficients& coeffs,
                         const PlanningParams& params,
                         std::optional<CandidateMeta> meta = std::nullopt);

CandidateSet BuildCandidates(const KinodynamicState& initial,
                             const PlanningParams& params);

/// Pointwise (1 - p) * best + p * failsafe over identical sample grids.
Trajectory Blend(const Trajectory& best, const Trajectory& failsafe, double p);

/// A trajectory that sits at the given pose for every sample.
Trajectory StationaryTrajectory(const KinodynamicState& state,
                                const PlanningParams& params);

}  // namespace duel
