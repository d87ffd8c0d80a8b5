#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "duel/trajectory.hpp"
#include "oracles.hpp"

namespace duel {
namespace {

KinodynamicState At(double x, double y, double vx, double vy = 0.0) {
  KinodynamicState s;
  s.x = x;
  s.y = y;
  s.vx = vx;
  s.vy = vy;
  s.theta = std::atan2(vy, vx);
  return s;
}

TEST(TerminalStateTest, ConstantSpeed) {
  const KinodynamicState t = TerminalState(At(3.0, 1.5, 0.5), 0.0, 1.5, {});
  EXPECT_NEAR(t.x, 3.0 + 2.5, 1e-12);
  EXPECT_NEAR(t.vx, 0.5, 1e-12);
  EXPECT_EQ(t.y, 1.5);
  EXPECT_EQ(t.vy, 0.0);
  EXPECT_EQ(t.ax, 0.0);
  EXPECT_EQ(t.ay, 0.0);
}

TEST(TerminalStateTest, AccelerateThenCruiseAtLimit) {
  PlanningParams p;
  p.v_max = 0.6;
  const KinodynamicState t = TerminalState(At(0.0, 1.5, 0.5), 0.05, 2.0, p);
  EXPECT_NEAR(t.vx, 0.6, 1e-12);
  EXPECT_NEAR(t.x, 2.9, 1e-12);
  EXPECT_NEAR(t.x, oracle::ClampedDistance(0.5, 0.05, 0.6, 5.0), 1e-9);
  EXPECT_EQ(t.y, 2.0);
}

TEST(TerminalStateTest, DecelerateWithoutClamp) {
  const KinodynamicState t = TerminalState(At(0.0, 1.5, 0.5), -0.05, 1.0, {});
  EXPECT_NEAR(t.vx, 0.25, 1e-12);
  EXPECT_NEAR(t.x, 1.875, 1e-12);
}

TEST(TerminalStateTest, SpeedFlooredAtZero) {
  const KinodynamicState t = TerminalState(At(0.0, 1.5, 0.1), -0.05, 1.5, {});
  EXPECT_EQ(t.vx, 0.0);
  EXPECT_NEAR(t.x, 0.1, 1e-12);  // stops after 2 s
  EXPECT_NEAR(t.x, oracle::ClampedDistance(0.1, -0.05, 0.6, 5.0), 1e-9);
}

TEST(TerminalStateTest, AlreadyAtLimit) {
  PlanningParams p;
  p.v_max = 0.6;
  const KinodynamicState t = TerminalState(At(0.0, 1.5, 0.6), 0.05, 1.5, p);
  EXPECT_NEAR(t.vx, 0.6, 1e-12);
  EXPECT_NEAR(t.x, 3.0, 1e-12);
}

TEST(TerminalStateTest, MatchesIntegratedProfile) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> v(0.0, 0.61), a(-0.2, 0.2);
  PlanningParams p;
  p.v_max = 0.61;
  for (int i = 0; i < 50; ++i) {
    const double v0 = v(gen), acc = a(gen);
    const KinodynamicState t = TerminalState(At(0.0, 1.5, v0), acc, 1.0, p);
    EXPECT_NEAR(t.x, oracle::ClampedDistance(v0, acc, 0.61, 5.0), 1e-8);
    EXPECT_GE(t.vx, 0.0);
    EXPECT_LE(t.vx, 0.61);
  }
}

TEST(TerminalStateTest, RejectsOffTrackTarget) {
  EXPECT_THROW(TerminalState(At(0, 1.5, 0.5), 0.0, 2.4, {}), std::invalid_argument);
  EXPECT_THROW(TerminalState(At(0, 1.5, 0.5), 0.0, 0.6, {}), std::invalid_argument);
}

TEST(FitQuinticTest, ConstantVelocityIsLinear) {
  KinodynamicState a = At(0.0, 1.5, 0.5), b = At(2.5, 1.5, 0.5);
  const QuinticCoefficients c = FitQuintic(a, b, 5.0);
  const std::array<double, 6> want{0, 0.5, 0, 0, 0, 0};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(c.a[i], want[i], 1e-12) << i;
  EXPECT_NEAR(c.b[0], 1.5, 1e-12);
  for (int i = 1; i < 6; ++i) EXPECT_NEAR(c.b[i], 0.0, 1e-12) << i;
}

TEST(FitQuinticTest, RestToRestIsConstant) {
  KinodynamicState s = At(1.0, 2.0, 0.0);
  const QuinticCoefficients c = FitQuintic(s, s, 5.0);
  EXPECT_NEAR(c.a[0], 1.0, 1e-15);
  EXPECT_NEAR(c.b[0], 2.0, 1e-15);
  for (int i = 1; i < 6; ++i) {
    EXPECT_NEAR(c.a[i], 0.0, 1e-15);
    EXPECT_NEAR(c.b[i], 0.0, 1e-15);
  }
}

TEST(FitQuinticTest, LaterialMoveMatchesFullBoundarySolve) {
  KinodynamicState a = At(0.0, 1.5, 0.5), b = At(2.5, 2.0, 0.5);
  const QuinticCoefficients c = FitQuintic(a, b, 5.0);
  const auto want = oracle::QuinticBoundarySolve(1.5, 0, 0, 2.0, 0, 0, 5.0);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(c.b[i], want[i], 1e-12) << i;
  EXPECT_NEAR(c.b[0], 1.5, 1e-15);
  EXPECT_NEAR(oracle::Poly(c.b, 5.0), 2.0, 1e-12);
  EXPECT_NEAR(oracle::Poly(c.b, 5.0, 1), 0.0, 1e-12);
  EXPECT_NEAR(oracle::Poly(c.b, 5.0, 2), 0.0, 1e-12);
}

TEST(FitQuinticTest, RandomBoundaryResiduals) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> pos(-5, 5), vel(-1, 1), acc(-0.5, 0.5), hor(0.5, 10);
  for (int i = 0; i < 1000; ++i) {
    KinodynamicState a, b;
    a.x = pos(gen), a.y = pos(gen), a.vx = vel(gen), a.vy = vel(gen), a.ax = acc(gen), a.ay = acc(gen);
    b.x = pos(gen), b.y = pos(gen), b.vx = vel(gen), b.vy = vel(gen), b.ax = acc(gen), b.ay = acc(gen);
    const double T = hor(gen);
    const QuinticCoefficients c = FitQuintic(a, b, T);
    const auto ox = oracle::QuinticBoundarySolve(a.x, a.vx, a.ax, b.x, b.vx, b.ax, T);
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(c.a[k], ox[k], 1e-9 * (1 + std::abs(ox[k])));
    EXPECT_LT(std::abs(EvalPolynomial(c.a, 0, 0) - a.x), 1e-9);
    EXPECT_LT(std::abs(EvalPolynomial(c.a, 0, 1) - a.vx), 1e-9);
    EXPECT_LT(std::abs(EvalPolynomial(c.a, 0, 2) - a.ax), 1e-9);
    EXPECT_LT(std::abs(EvalPolynomial(c.a, T, 0) - b.x), 1e-9);
    EXPECT_LT(std::abs(EvalPolynomial(c.a, T, 1) - b.vx), 1e-9);
    EXPECT_LT(std::abs(EvalPolynomial(c.a, T, 2) - b.ax), 1e-9);
    EXPECT_LT(std::abs(EvalPolynomial(c.b, T, 0) - b.y), 1e-9);
    EXPECT_LT(std::abs(EvalPolynomial(c.b, T, 1) - b.vy), 1e-9);
    EXPECT_LT(std::abs(EvalPolynomial(c.b, T, 2) - b.ay), 1e-9);
  }
}

TEST(FitQuinticTest, RejectsNonPositiveHorizon) {
  EXPECT_THROW(FitQuintic({}, {}, 0.0), std::invalid_argument);
}

TEST(EvalPolynomialTest, MatchesOracle) {
  const std::array<double, 6> c{1, -2, 0.5, 0.25, -0.125, 0.0625};
  for (double t : {0.0, 0.3, 1.7, 5.0}) {
    for (int order = 0; order <= 2; ++order) {
      EXPECT_NEAR(EvalPolynomial(c, t, order), oracle::Poly(c, t, order), 1e-12);
    }
  }
  EXPECT_THROW(EvalPolynomial(c, 1.0, 3), std::invalid_argument);
}

TEST(SampleQuinticTest, GridAndValues) {
  PlanningParams p;
  const QuinticCoefficients c = FitQuintic(At(0, 1.5, 0.5), At(2.5, 2.0, 0.5), 5.0);
  const Trajectory t = SampleQuintic(c, p);
  ASSERT_EQ(t.samples.size(), 26u);
  EXPECT_EQ(p.NumSamples(), 26);
  EXPECT_EQ(t.samples.front().t, 0.0);
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    if (i > 0) EXPECT_GT(t.samples[i].t, t.samples[i - 1].t);
    EXPECT_NEAR(t.samples[i].t, 0.2 * i, 1e-12);
    EXPECT_NEAR(t.samples[i].x, oracle::Poly(c.a, t.samples[i].t), 1e-9);
    EXPECT_NEAR(t.samples[i].y, oracle::Poly(c.b, t.samples[i].t), 1e-9);
  }
  ASSERT_TRUE(t.coeffs.has_value());
}

TEST(SampleQuinticTest, NumericDerivativesMatchBoundaries) {
  PlanningParams p;
  KinodynamicState a = At(0, 1.5, 0.5);
  a.ax = 0.02;
  a.ay = -0.01;
  const KinodynamicState b = TerminalState(a, 0.05, 2.0, p);
  const QuinticCoefficients c = FitQuintic(a, b, 5.0);
  const Trajectory t = SampleQuintic(c, p);
  const double h = p.sample_time;
  const auto& s = t.samples;
  const int n = static_cast<int>(s.size());
  // Second-order one-sided differences; truncation error bounded by the
  // next derivative, which for a quintic over 5 s is small.
  double d3 = 0, d4 = 0;
  for (double tt = 0; tt <= 5.0; tt += 0.01) {
    auto third = [&](const std::array<double, 6>& k) {
      return 6 * k[3] + 24 * k[4] * tt + 60 * k[5] * tt * tt;
    };
    auto fourth = [&](const std::array<double, 6>& k) { return 24 * k[4] + 120 * k[5] * tt; };
    d3 = std::max({d3, std::abs(third(c.a)), std::abs(third(c.b))});
    d4 = std::max({d4, std::abs(fourth(c.a)), std::abs(fourth(c.b))});
  }
  const double vtol = h * h * d3 + 1e-9;
  const double atol = 2 * h * h * d4 + h * 1e-3 + 1e-9;
  auto v0 = [&](auto get) { return (-3 * get(0) + 4 * get(1) - get(2)) / (2 * h); };
  auto vT = [&](auto get) { return (3 * get(n - 1) - 4 * get(n - 2) + get(n - 3)) / (2 * h); };
  auto acc0 = [&](auto get) { return (2 * get(0) - 5 * get(1) + 4 * get(2) - get(3)) / (h * h); };
  auto accT = [&](auto get) {
    return (2 * get(n - 1) - 5 * get(n - 2) + 4 * get(n - 3) - get(n - 4)) / (h * h);
  };
  auto xs = [&](int i) { return s[i].x; };
  auto ys = [&](int i) { return s[i].y; };
  EXPECT_NEAR(v0(xs), a.vx, vtol);
  EXPECT_NEAR(v0(ys), a.vy, vtol);
  EXPECT_NEAR(vT(xs), b.vx, vtol);
  EXPECT_NEAR(vT(ys), 0.0, vtol);
  EXPECT_NEAR(acc0(xs), a.ax, atol);
  EXPECT_NEAR(acc0(ys), a.ay, atol);
  EXPECT_NEAR(accT(xs), 0.0, atol);
  EXPECT_NEAR(accT(ys), 0.0, atol);
}

TEST(BuildCandidatesTest, CanonicalOrderAndEndpoints) {
  PlanningParams p;
  const CandidateSet set = BuildCandidates(At(0.0, 1.5, 0.5), p);
  ASSERT_EQ(set.size(), 9u);
  const double as[] = {-0.05, 0.0, 0.05};
  const double ys[] = {1.0, 1.5, 2.0};
  for (int i = 0; i < 9; ++i) {
    ASSERT_TRUE(set[i].meta.has_value());
    EXPECT_EQ(set[i].meta->a_set, as[i / 3]);
    EXPECT_EQ(set[i].meta->y_target, ys[i % 3]);
    EXPECT_EQ(set[i].samples.size(), 26u);
  }
  EXPECT_NEAR(set[4].samples.back().x, 2.5, 1e-9);
  EXPECT_NEAR(set[4].samples.back().y, 1.5, 1e-9);
  EXPECT_NEAR(set[0].samples.back().x, 1.875, 1e-9);
  EXPECT_NEAR(set[8].samples.back().x, 2.9, 1e-9);
  EXPECT_NEAR(set[8].samples.back().y, 2.0, 1e-9);
}

TEST(BuildCandidatesTest, AlwaysNineAndInsideTrack) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> y(0.65, 2.35), v(0.0, 0.6), vy(-0.3, 0.3);
  PlanningParams p;
  for (int i = 0; i < 200; ++i) {
    const CandidateSet set = BuildCandidates(At(10.0, y(gen), v(gen), vy(gen)), p);
    ASSERT_EQ(set.size(), 9u);
    for (const Trajectory& t : set.trajectories) {
      for (const auto& s : t.samples) {
        EXPECT_GE(s.y, p.y_min);
        EXPECT_LE(s.y, p.y_max);
      }
      EXPECT_GE(EvalPolynomial(t.coeffs->a, p.horizon, 1), -1e-9);
      EXPECT_LE(EvalPolynomial(t.coeffs->a, p.horizon, 1), p.v_max + 1e-9);
    }
  }
}

TEST(BuildCandidatesTest, OvershootIsClampedAndFlagged) {
  PlanningParams p;
  // Heading hard toward the lower edge; the fit to y_T = 1.0 overshoots.
  const CandidateSet set = BuildCandidates(At(0.0, 0.7, 0.3, -0.4), p);
  bool flagged = false;
  for (const Trajectory& t : set.trajectories) {
    for (const auto& s : t.samples) EXPECT_GE(s.y, 0.65);
    flagged = flagged || t.meta->lateral_clamped;
  }
  EXPECT_TRUE(flagged);
  EXPECT_FALSE(BuildCandidates(At(0.0, 1.5, 0.5), p)[4].meta->lateral_clamped);
}

TEST(PlanningParamsTest, Validation) {
  PlanningParams p;
  EXPECT_NO_THROW(p.Validate());
  p.horizon = 5.1;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p = {};
  p.y_target_values = {3.0};
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p = {};
  p.a_set_values.clear();
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p = {};
  p.v_max = 0.0;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
}

Trajectory Line(double x0, double y0, double dx, double dy, int n = 26) {
  Trajectory t;
  for (int i = 0; i < n; ++i) t.samples.push_back({0.2 * i, x0 + dx * i, y0 + dy * i});
  return t;
}

TEST(BlendTest, Identities) {
  const Trajectory a = Line(0, 1.5, 0.1, 0.0), b = Line(0, 2.0, 0.12, -0.01);
  const Trajectory p0 = Blend(a, b, 0.0), p1 = Blend(a, b, 1.0);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(p0.samples[i].x, a.samples[i].x);
    EXPECT_EQ(p0.samples[i].y, a.samples[i].y);
    EXPECT_EQ(p1.samples[i].x, b.samples[i].x);
    EXPECT_EQ(p1.samples[i].y, b.samples[i].y);
    EXPECT_EQ(p0.samples[i].t, a.samples[i].t);
  }
  EXPECT_FALSE(p0.coeffs.has_value());
}

TEST(BlendTest, HandExample) {
  Trajectory best, fail;
  best.samples = {{0.0, 1.0, 1.5}};
  fail.samples = {{0.0, 1.0, 2.0}};
  const Trajectory m = Blend(best, fail, 0.2);
  EXPECT_NEAR(m.samples[0].x, 1.0, 1e-15);
  EXPECT_NEAR(m.samples[0].y, 1.6, 1e-15);
}

TEST(BlendTest, SelfBlendAndSymmetry) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0, 1), d(-0.2, 0.2);
  for (int trial = 0; trial < 200; ++trial) {
    const Trajectory a = Line(u(gen), 1 + u(gen), d(gen), d(gen));
    const Trajectory b = Line(u(gen), 1 + u(gen), d(gen), d(gen));
    const double p = u(gen);
    const Trajectory aa = Blend(a, a, p);
    const Trajectory ab = Blend(a, b, p), ba = Blend(b, a, 1 - p);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      EXPECT_EQ(aa.samples[i].x, a.samples[i].x);
      EXPECT_EQ(aa.samples[i].y, a.samples[i].y);
      EXPECT_NEAR(ab.samples[i].x, ba.samples[i].x, 1e-12);
      EXPECT_NEAR(ab.samples[i].y, ba.samples[i].y, 1e-12);
    }
  }
}

TEST(BlendTest, Rejections) {
  const Trajectory a = Line(0, 1.5, 0.1, 0.0);
  EXPECT_THROW(Blend(a, a, -0.01), std::invalid_argument);
  EXPECT_THROW(Blend(a, a, 1.01), std::invalid_argument);
  EXPECT_THROW(Blend(a, a, std::nan("")), std::invalid_argument);
  EXPECT_THROW(Blend(a, Line(0, 1.5, 0.1, 0.0, 25), 0.5), std::invalid_argument);
  Trajectory shifted = a;
  shifted.samples[3].t += 0.01;
  EXPECT_THROW(Blend(a, shifted, 0.5), std::invalid_argument);
}

TEST(StationaryTrajectoryTest, HoldsPose) {
  PlanningParams p;
  const Trajectory t = StationaryTrajectory(At(3.0, 1.2, 0.5), p);
  ASSERT_EQ(t.samples.size(), 26u);
  for (const auto& s : t.samples) {
    EXPECT_EQ(s.x, 3.0);
    EXPECT_EQ(s.y, 1.2);
  }
}

}  // namespace
}  // namespace duel
