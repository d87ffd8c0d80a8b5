#include "duel/tracking.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace duel {
namespace {

constexpr double kMinSegment = 1e-9;

struct Rollout {
  std::vector<KinodynamicState> states;  // horizon + 1 entries
};

Rollout Simulate(const KinodynamicState& start,
                 const std::vector<ControlInput>& inputs, double dt) {
  Rollout r;
  r.states.reserve(inputs.size() + 1);
  r.states.push_back(start);
  for (const ControlInput& u : inputs) r.states.push_back(Step(r.states.back(), u, dt));
  return r;
}

double CostOf(const Rollout& rollout, const std::vector<ControlInput>& inputs,
              const std::vector<ReferencePoint>& refs, const TrackerConfig& c) {
  double j = 0.0;
  for (std::size_t k = 0; k < refs.size(); ++k) {
    const KinodynamicState& s = rollout.states[k + 1];
    const ReferencePoint& r = refs[k];
    const double ex = s.x - r.x;
    const double ey = s.y - r.y;
    const double eth = WrapHeading(s.theta - r.theta);
    const double ev = inputs[k].v - r.v;
    const double ew = inputs[k].omega - r.omega;
    j += c.state_weights[0] * ex * ex + c.state_weights[1] * ey * ey +
         c.state_weights[2] * eth * eth + c.input_weights[0] * ev * ev +
         c.input_weights[1] * ew * ew;
  }
  return j;
}

std::vector<ControlInput> ClampedReferenceInputs(
    const std::vector<ReferencePoint>& refs, const RobotLimits& limits) {
  std::vector<ControlInput> out;
  out.reserve(refs.size());
  for (const ReferencePoint& r : refs) out.push_back(ClampInput({r.v, r.omega}, limits));
  return out;
}

// min 0.5 x'Hx + g'x subject to lo <= x <= hi. Primal-dual active-set
// passes on the reduced Newton system, polished by projected coordinate
// descent in case the sets cycle.
Eigen::VectorXd BoxQp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                      int sweeps) {
  const int n = static_cast<int>(g.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);  // bound multipliers
  std::vector<int> state(n, 2);  // -1 lower, 0 free, +1 upper; 2 unset
  bool converged = false;
  for (int pass = 0; pass < 12 && !converged; ++pass) {
    std::vector<int> next(n, 0);
    for (int i = 0; i < n; ++i) {
      if (x(i) - mu(i) < lo(i)) next[i] = -1;
      else if (x(i) - mu(i) > hi(i)) next[i] = 1;
    }
    if (pass > 0 && next == state) {
      converged = true;
      break;
    }
    state = next;
    std::vector<int> free;
    for (int i = 0; i < n; ++i) {
      if (state[i] == 0) free.push_back(i);
      else x(i) = state[i] < 0 ? lo(i) : hi(i);
    }
    const int m = static_cast<int>(free.size());
    if (m > 0) {
      Eigen::MatrixXd hf(m, m);
      Eigen::VectorXd rhs(m);
      for (int a = 0; a < m; ++a) {
        rhs(a) = -g(free[a]);
        for (int i = 0; i < n; ++i) {
          if (state[i] != 0) rhs(a) -= h(free[a], i) * x(i);
        }
        for (int b = 0; b < m; ++b) hf(a, b) = h(free[a], free[b]);
      }
      Eigen::VectorXd sol;
      const Eigen::LLT<Eigen::MatrixXd> llt(hf);
      if (llt.info() == Eigen::Success) {
        sol = llt.solve(rhs);
      } else {  // semidefinite when some weights are zero
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(hf);
        if (ldlt.info() != Eigen::Success) break;
        sol = ldlt.solve(rhs);
      }
      if (!sol.allFinite()) break;
      for (int a = 0; a < m; ++a) x(free[a]) = sol(a);
    }
    mu = h * x + g;
    for (int i = 0; i < n; ++i) {
      if (state[i] == 0) mu(i) = 0.0;
    }
  }
  x = x.cwiseMax(lo).cwiseMin(hi);
  if (converged) return x;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double moved = 0.0;
    for (int i = 0; i < n; ++i) {
      const double hii = h(i, i);
      if (hii <= 0.0) continue;
      const double gi = h.row(i).dot(x) + g(i);
      const double updated = std::clamp(x(i) - gi / hii, lo(i), hi(i));
      moved = std::max(moved, std::abs(updated - x(i)));
      x(i) = updated;
    }
    if (moved < 1e-12) break;
  }
  return x;
}

}  // namespace

void TrackerConfig::Validate() const {
  if (horizon < 1) throw std::invalid_argument("tracker: horizon must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("tracker: dt must be > 0");
  for (double w : state_weights) {
    if (w < 0.0) throw std::invalid_argument("tracker: negative state weight");
  }
  for (double w : input_weights) {
    if (w < 0.0) throw std::invalid_argument("tracker: negative input weight");
  }
  if (!(limits.v_max > 0.0) || !(limits.omega_max > 0.0)) {
    throw std::invalid_argument("tracker: input bounds must be well ordered");
  }
}

std::vector<ReferencePoint> ReferenceFromTrajectory(const Trajectory& traj,
                                                    int now_index, int horizon,
                                                    double dt,
                                                    const RobotLimits& limits) {
  if (traj.samples.empty()) {
    throw std::invalid_argument("ReferenceFromTrajectory: empty trajectory");
  }
  const int last = static_cast<int>(traj.samples.size()) - 1;
  now_index = std::clamp(now_index, 0, last);
  auto point = [&](int i) -> const TrajectorySample& {
    return traj.samples[std::min(i, last)];
  };

  // Heading of the segment leaving sample i, for i in [0, now + horizon].
  // Degenerate segments inherit the previous heading.
  const int span = now_index + horizon + 1;
  std::vector<double> heading(span, 0.0);
  double held = 0.0;
  bool have = false;
  for (int i = 0; i < span; ++i) {
    const double dx = point(i + 1).x - point(i).x;
    const double dy = point(i + 1).y - point(i).y;
    if (std::hypot(dx, dy) > kMinSegment) {
      held = std::atan2(dy, dx);
      if (!have) std::fill(heading.begin(), heading.begin() + i, held);
      have = true;
    }
    heading[i] = held;
  }

  std::vector<ReferencePoint> refs;
  refs.reserve(horizon);
  for (int k = 0; k < horizon; ++k) {
    const int i = now_index + k;
    const TrajectorySample& from = point(i);
    const TrajectorySample& to = point(i + 1);
    ReferencePoint r;
    r.x = to.x;
    r.y = to.y;
    r.theta = heading[i + 1];
    r.v = std::clamp(std::hypot(to.x - from.x, to.y - from.y) / dt, 0.0,
                     limits.v_max);
    r.omega = std::clamp(WrapHeading(heading[i + 1] - heading[i]) / dt,
                         -limits.omega_max, limits.omega_max);
    refs.push_back(r);
  }
  return refs;
}

double HorizonCost(const KinodynamicState& state,
                   const std::vector<ControlInput>& inputs,
                   const std::vector<ReferencePoint>& refs,
                   const TrackerConfig& config) {
  if (inputs.size() != refs.size()) {
    throw std::invalid_argument("HorizonCost: inputs and references differ in length");
  }
  return CostOf(Simulate(state, inputs, config.dt), inputs, refs, config);
}

MpcTracker::MpcTracker(TrackerConfig config) : config_(std::move(config)) {
  config_.Validate();
}

TrackerSolution MpcTracker::Solve(const KinodynamicState& state,
                                  const std::vector<ReferencePoint>& refs) {
  const int horizon = config_.horizon;
  if (static_cast<int>(refs.size()) != horizon) {
    throw std::invalid_argument("MpcTracker: reference length != horizon");
  }
  const double dt = config_.dt;
  const RobotLimits& lim = config_.limits;
  const int n = 2 * horizon;

  TrackerSolution sol;
  const std::vector<ControlInput> reference_inputs = ClampedReferenceInputs(refs, lim);
  sol.reference_cost = HorizonCost(state, reference_inputs, refs, config_);

  std::vector<ControlInput> current = reference_inputs;
  double current_cost = sol.reference_cost;
  if (warm_start_ && static_cast<int>(warm_start_->size()) == horizon) {
    std::vector<ControlInput> shifted(warm_start_->begin() + 1, warm_start_->end());
    shifted.push_back(warm_start_->back());
    for (ControlInput& u : shifted) u = ClampInput(u, lim);
    const double shifted_cost = HorizonCost(state, shifted, refs, config_);
    if (shifted_cost < current_cost) {
      current = std::move(shifted);
      current_cost = shifted_cost;
    }
  }

  const Eigen::Vector3d q(config_.state_weights[0], config_.state_weights[1],
                          config_.state_weights[2]);
  const Eigen::Vector2d r(config_.input_weights[0], config_.input_weights[1]);

  bool accepted_any = false;
  double first_gradient_norm = 0.0;
  Eigen::MatrixXd hess(n, n);
  Eigen::VectorXd grad(n), lower(n), upper(n), step(n);
  Eigen::MatrixXd sens(3, n);
  Eigen::MatrixXd weighted(3 * horizon, n);  // sqrt(Q) * sensitivities

  for (int iter = 0; iter < config_.max_iterations; ++iter) {
    const Rollout roll = Simulate(state, current, dt);

    // Condensed sensitivities dX(k+1)/dU accumulated into the Gauss-Newton
    // normal equations; only the first 2(k+1) columns can be nonzero.
    sens.setZero();
    grad.setZero();
    for (int k = 0; k < horizon; ++k) {
      const KinodynamicState& s = roll.states[k];
      const double v = current[k].v;
      const double c = std::cos(s.theta), sn = std::sin(s.theta);
      const int used = 2 * k;
      // A = I + [[0, 0, -v dt sin], [0, 0, v dt cos], [0, 0, 0]]
      sens.row(0).head(used) += (-v * dt * sn) * sens.row(2).head(used);
      sens.row(1).head(used) += (v * dt * c) * sens.row(2).head(used);
      sens(0, used) = dt * c;
      sens(1, used) = dt * sn;
      sens(2, used + 1) = dt;

      const KinodynamicState& next = roll.states[k + 1];
      const Eigen::Vector3d err(next.x - refs[k].x, next.y - refs[k].y,
                                WrapHeading(next.theta - refs[k].theta));
      for (int row = 0; row < 3; ++row) {
        const double w = std::sqrt(q(row));
        weighted.row(3 * k + row) = w * sens.row(row);
        grad.head(used + 2) += (q(row) * err(row)) * sens.row(row).head(used + 2).transpose();
      }
      lower(2 * k) = -current[k].v;
      upper(2 * k) = lim.v_max - current[k].v;
      lower(2 * k + 1) = -lim.omega_max - current[k].omega;
      upper(2 * k + 1) = lim.omega_max - current[k].omega;
    }
    hess.setZero();
    hess.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
    hess.triangularView<Eigen::StrictlyUpper>() = hess.transpose();
    for (int k = 0; k < horizon; ++k) {
      hess(2 * k, 2 * k) += r(0);
      hess(2 * k + 1, 2 * k + 1) += r(1);
      grad(2 * k) += r(0) * (current[k].v - refs[k].v);
      grad(2 * k + 1) += r(1) * (current[k].omega - refs[k].omega);
    }

    // Projected gradient norm measures distance from a box-KKT point.
    double pg = 0.0;
    for (int i = 0; i < n; ++i) {
      const double gi = grad(i);
      if ((gi > 0 && lower(i) < 0) || (gi < 0 && upper(i) > 0)) pg += gi * gi;
    }
    pg = std::sqrt(pg);
    if (iter == 0) first_gradient_norm = pg;
    if (pg < 1e-9) break;

    step = BoxQp(hess, grad, lower, upper, config_.qp_sweeps);

    bool accepted = false;
    bool stalled = false;
    for (double alpha = 1.0; alpha > 1e-3; alpha *= 0.5) {
      std::vector<ControlInput> trial = current;
      for (int k = 0; k < horizon; ++k) {
        trial[k] = ClampInput({current[k].v + alpha * step(2 * k),
                               current[k].omega + alpha * step(2 * k + 1)},
                              lim);
      }
      const double trial_cost = HorizonCost(state, trial, refs, config_);
      if (trial_cost < current_cost) {
        const double gain = current_cost - trial_cost;
        current = std::move(trial);
        current_cost = trial_cost;
        accepted = true;
        stalled = gain < 1e-12 * (1.0 + current_cost);
        break;
      }
    }
    sol.iterations = iter + 1;
    if (!accepted) break;
    accepted_any = true;
    if (stalled) break;
  }

  if (!accepted_any && first_gradient_norm >= 1e-9 &&
      current_cost >= sol.reference_cost) {
    current = reference_inputs;
    current_cost = sol.reference_cost;
    sol.fallback = true;
  }

  sol.sequence = current;
  sol.cost = current_cost;
  sol.input = current.front();
  warm_start_ = std::move(current);
  return sol;
}

}  // namespace duel
