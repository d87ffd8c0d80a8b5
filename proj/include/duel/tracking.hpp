#pragma once

#include <array>
#include <optional>
#include <vector>

#include "duel/kinematics.hpp"
#include "duel/trajectory.hpp"

namespace duel {

struct TrackerConfig {
  int horizon = 20;
  double dt = 0.2;
  std::array<double, 3> state_weights{10.0, 10.0, 1.0};  // x, y, theta
  std::array<double, 2> input_weights{1.0, 1.0};         // v, omega
  RobotLimits limits;
  int max_iterations = 8;
  int qp_sweeps = 60;

  void Validate() const;
};

/// Target for X(k+1) together with the input u(k) that produces it.
struct ReferencePoint {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double omega = 0.0;
};

/// References for the `horizon` samples after `now_index`. Samples past the
/// end of the trajectory hold the last point. Headings come from the
/// segment leaving each sample, so feeding the (v, omega) references to the
/// kinematics reproduces the polyline when the bounds allow it.
/// Throws std::invalid_argument on an empty trajectory.
std::vector<ReferencePoint> ReferenceFromTrajectory(const Trajectory& traj,
                                                    int now_index, int horizon,
                                                    double dt,
                                                    const RobotLimits& limits);

/// Quadratic tracking cost of an input sequence rolled out from `state`.
double HorizonCost(const KinodynamicState& state,
                   const std::vector<ControlInput>& inputs,
                   const std::vector<ReferencePoint>& refs,
                   const TrackerConfig& config);

struct TrackerSolution {
  ControlInput input;
  std::vector<ControlInput> sequence;
  double cost = 0.0;
  double reference_cost = 0.0;  // cost of the clamped reference inputs
  bool fallback = false;
  int iterations = 0;
};

/// Receding-horizon tracker: Gauss-Newton on the linearized unicycle with a
/// box-constrained QP per iteration, warm-started from the previous solve.
class MpcTracker {
 public:
  explicit MpcTracker(TrackerConfig config);

  TrackerSolution Solve(const KinodynamicState& state,
                        const std::vector<ReferencePoint>& refs);

  void Reset() { warm_start_.reset(); }
  const TrackerConfig& config() const { return config_; }

 private:
  TrackerConfig config_;
  std::optional<std::vector<ControlInput>> warm_start_;
};

}  // namespace duel
