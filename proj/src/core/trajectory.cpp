#include "duel/trajectory.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace duel {
namespace {

constexpr double kGridTolerance = 1e-9;

std::array<double, 6> FitAxis(double p0, double v0, double a0, double p1,
                              double v1, double a1, double horizon) {
  const double t = horizon;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t3 * t;
  const double t5 = t4 * t;

  // The first three coefficients follow from the t = 0 conditions.
  std::array<double, 6> c{p0, v0, 0.5 * a0, 0.0, 0.0, 0.0};

  Eigen::Matrix3d lhs;
  lhs << t3, t4, t5,
         3 * t2, 4 * t3, 5 * t4,
         6 * t, 12 * t2, 20 * t3;
  Eigen::Vector3d rhs(p1 - (c[0] + c[1] * t + c[2] * t2),
                      v1 - (c[1] + 2 * c[2] * t),
                      a1 - 2 * c[2]);
  const Eigen::Vector3d high = lhs.fullPivLu().solve(rhs);
  c[3] = high(0);
  c[4] = high(1);
  c[5] = high(2);
  return c;
}

// Rounding can push b + p (f - b) an ulp past the segment; the clamp is
// the identity in exact arithmetic.
double Mix(double b, double f, double p) {
  if (p == 1.0) return f;
  const double v = b + p * (f - b);
  return std::clamp(v, std::min(b, f), std::max(b, f));
}

}  // namespace

int PlanningParams::NumSamples() const {
  return static_cast<int>(std::lround(horizon / sample_time)) + 1;
}

void PlanningParams::Validate() const {
  if (!(horizon > 0.0) || !(sample_time > 0.0) || !(v_max > 0.0)) {
    throw std::invalid_argument("planning: horizon, sample_time, v_max must be > 0");
  }
  const double steps = horizon / sample_time;
  if (std::abs(steps - std::round(steps)) > 1e-9) {
    throw std::invalid_argument("planning: horizon must be a multiple of sample_time");
  }
  if (!(y_min < y_max)) throw std::invalid_argument("planning: empty track");
  if (a_set_values.empty() || y_target_values.empty()) {
    throw std::invalid_argument("planning: empty candidate grid");
  }
  for (double y : y_target_values) {
    if (y < y_min || y > y_max) {
      throw std::invalid_argument("planning: lateral target outside the track");
    }
  }
}

double EvalPolynomial(const std::array<double, 6>& c, double t, int order) {
  switch (order) {
    case 0:
      return ((((c[5] * t + c[4]) * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0];
    case 1:
      return (((5 * c[5] * t + 4 * c[4]) * t + 3 * c[3]) * t + 2 * c[2]) * t + c[1];
    case 2:
      return ((20 * c[5] * t + 12 * c[4]) * t + 6 * c[3]) * t + 2 * c[2];
    default:
      throw std::invalid_argument("EvalPolynomial: order must be 0, 1 or 2");
  }
}

KinodynamicState TerminalState(const KinodynamicState& initial, double a_set,
                               double y_target, const PlanningParams& params) {
  if (y_target < params.y_min || y_target > params.y_max) {
    throw std::invalid_argument("TerminalState: y_target outside the track");
  }
  const double t_total = params.horizon;
  const double v0 = initial.vx;
  const double v_unclamped = v0 + a_set * t_total;
  const double v_end = std::clamp(v_unclamped, 0.0, params.v_max);

  // Time spent accelerating before the clamp (if any) binds.
  double t_ramp = t_total;
  if (a_set != 0.0 && v_unclamped != v_end) {
    t_ramp = std::clamp((v_end - v0) / a_set, 0.0, t_total);
  }
  const double distance =
      v0 * t_ramp + 0.5 * a_set * t_ramp * t_ramp + v_end * (t_total - t_ramp);

  KinodynamicState terminal;
  terminal.x = initial.x + distance;
  terminal.y = y_target;
  terminal.vx = v_end;
  return terminal;
}

QuinticCoefficients FitQuintic(const KinodynamicState& initial,
                               const KinodynamicState& terminal,
                               double horizon) {
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("FitQuintic: horizon must be positive");
  }
  QuinticCoefficients out;
  out.a = FitAxis(initial.x, initial.vx, initial.ax, terminal.x, terminal.vx,
                  terminal.ax, horizon);
  out.b = FitAxis(initial.y, initial.vy, initial.ay, terminal.y, terminal.vy,
                  terminal.ay, horizon);
  return out;
}

Trajectory SampleQuintic(const QuinticCoefficients& coeffs,
                         const PlanningParams& params,
                         std::optional<CandidateMeta> meta) {
  Trajectory traj;
  traj.coeffs = coeffs;
  const int n = params.NumSamples();
  traj.samples.reserve(n);
  bool clamped = false;
  for (int i = 0; i < n; ++i) {
    const double t = i * params.sample_time;
    const double y = EvalPolynomial(coeffs.b, t);
    const double y_in = std::clamp(y, params.y_min, params.y_max);
    clamped = clamped || y_in != y;
    traj.samples.push_back({t, EvalPolynomial(coeffs.a, t), y_in});
  }
  if (meta) meta->lateral_clamped = clamped;
  traj.meta = meta;
  return traj;
}

CandidateSet BuildCandidates(const KinodynamicState& initial,
                             const PlanningParams& params) {
  CandidateSet set;
  set.trajectories.reserve(params.a_set_values.size() *
                           params.y_target_values.size());
  for (double a_set : params.a_set_values) {
    for (double y_target : params.y_target_values) {
      const KinodynamicState terminal =
          TerminalState(initial, a_set, y_target, params);
      const QuinticCoefficients coeffs =
          FitQuintic(initial, terminal, params.horizon);
      set.trajectories.push_back(
          SampleQuintic(coeffs, params, CandidateMeta{a_set, y_target, false}));
    }
  }
  return set;
}

Trajectory Blend(const Trajectory& best, const Trajectory& failsafe, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("Blend: weight outside [0, 1]");
  }
  if (best.samples.size() != failsafe.samples.size()) {
    throw std::invalid_argument("Blend: sample grids differ in length");
  }
  Trajectory out;
  out.samples.reserve(best.samples.size());
  for (std::size_t i = 0; i < best.samples.size(); ++i) {
    const TrajectorySample& b = best.samples[i];
    const TrajectorySample& f = failsafe.samples[i];
    if (std::abs(b.t - f.t) > kGridTolerance) {
      throw std::invalid_argument("Blend: sample times differ");
    }
    out.samples.push_back({b.t, Mix(b.x, f.x, p), Mix(b.y, f.y, p)});
  }
  return out;
}

Trajectory StationaryTrajectory(const KinodynamicState& state,
                                const PlanningParams& params) {
  Trajectory traj;
  const int n = params.NumSamples();
  traj.samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    traj.samples.push_back({i * params.sample_time, state.x, state.y});
  }
  return traj;
}

}  // namespace duel
