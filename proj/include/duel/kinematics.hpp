#pragma once

#include <cmath>

namespace duel {

/// Planar pose plus velocity/acceleration components of one robot.
///
/// Only (x, y, theta) evolve under the differential-drive model; the
/// velocity and acceleration fields are kept so the state can seed the
/// boundary conditions of a trajectory fit.
struct KinodynamicState {
  double x = 0.0;      // longitudinal position [m]
  double y = 0.0;      // lateral position [m]
  double theta = 0.0;  // heading [rad], in (-pi, pi]
  double vx = 0.0;     // [m/s]
  double vy = 0.0;     // [m/s]
  double ax = 0.0;     // [m/s^2]
  double ay = 0.0;     // [m/s^2]

  double Speed() const { return std::hypot(vx, vy); }
  bool IsFinite() const;
};

struct ControlInput {
  double v = 0.0;      // linear velocity [m/s]
  double omega = 0.0;  // angular velocity [rad/s]
};

struct RobotLimits {
  double v_max = 0.6;
  double omega_max = 2.0;
};

/// Wraps an angle into (-pi, pi].
double WrapHeading(double theta);

/// Projects an input onto the robot's box of admissible inputs.
ControlInput ClampInput(const ControlInput& input, const RobotLimits& limits);

/// One explicit Euler step of x' = v cos(theta), y' = v sin(theta),
/// theta' = omega. The returned velocity is v along the new heading and
/// the acceleration is the finite difference of the two velocities.
///
/// Throws std::invalid_argument on non-finite data or dt <= 0.
KinodynamicState Step(const KinodynamicState& state, const ControlInput& input,
                      double dt);

}  // namespace duel
