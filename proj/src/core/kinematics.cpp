#include "duel/kinematics.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace duel {

bool KinodynamicState::IsFinite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta) &&
         std::isfinite(vx) && std::isfinite(vy) && std::isfinite(ax) &&
         std::isfinite(ay);
}

double WrapHeading(double theta) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::remainder(theta, kTwoPi);
  if (wrapped <= -std::numbers::pi) wrapped += kTwoPi;
  return wrapped;
}

ControlInput ClampInput(const ControlInput& input, const RobotLimits& limits) {
  return {std::clamp(input.v, 0.0, limits.v_max),
          std::clamp(input.omega, -limits.omega_max, limits.omega_max)};
}

KinodynamicState Step(const KinodynamicState& state, const ControlInput& input,
                      double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("Step: dt must be positive and finite");
  }
  if (!state.IsFinite() || !std::isfinite(input.v) ||
      !std::isfinite(input.omega)) {
    throw std::invalid_argument("Step: non-finite state or input");
  }

  KinodynamicState next;
  next.x = state.x + input.v * std::cos(state.theta) * dt;
  next.y = state.y + input.v * std::sin(state.theta) * dt;
  next.theta = WrapHeading(state.theta + input.omega * dt);
  next.vx = input.v * std::cos(next.theta);
  next.vy = input.v * std::sin(next.theta);
  next.ax = (next.vx - state.vx) / dt;
  next.ay = (next.vy - state.vy) / dt;
  return next;
}

}  // namespace duel
