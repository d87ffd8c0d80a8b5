#include <gtest/gtest.h>

#include "duel/sim.hpp"

namespace duel {
namespace {

void ExpectSameTrace(const EpisodeRecord& a, const EpisodeRecord& b) {
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].ego.x, b.samples[i].ego.x);
    EXPECT_EQ(a.samples[i].ego.y, b.samples[i].ego.y);
    EXPECT_EQ(a.samples[i].opponent.x, b.samples[i].opponent.x);
    EXPECT_EQ(a.samples[i].opponent.y, b.samples[i].opponent.y);
    EXPECT_EQ(a.samples[i].ego_input.v, b.samples[i].ego_input.v);
    EXPECT_EQ(a.samples[i].opponent_input.omega, b.samples[i].opponent_input.omega);
  }
  ASSERT_EQ(a.cycles.size(), b.cycles.size());
  for (std::size_t i = 0; i < a.cycles.size(); ++i) {
    EXPECT_EQ(a.cycles[i].beliefs, b.cycles[i].beliefs);
    EXPECT_EQ(a.cycles[i].potential, b.cycles[i].potential);
    EXPECT_EQ(a.cycles[i].best_index, b.cycles[i].best_index);
  }
  EXPECT_EQ(a.outcome, b.outcome);
  EXPECT_EQ(a.collision, b.collision);
  EXPECT_EQ(a.end_step, b.end_step);
}

TEST(CollisionTest, StrictSquareOverlap) {
  KinodynamicState a, b;
  b.x = 0.29;
  b.y = -0.29;
  EXPECT_TRUE(DetectCollision(a, b, 0.3));
  b.x = 0.3;
  EXPECT_FALSE(DetectCollision(a, b, 0.3));
  b.x = 0.0;
  b.y = 0.31;
  EXPECT_FALSE(DetectCollision(a, b, 0.3));
}

TEST(SimConfigTest, DerivedCounts) {
  const SimConfig c;
  EXPECT_EQ(c.CycleSteps(), 5);
  EXPECT_EQ(c.EpisodeSteps(), 300);
  EXPECT_EQ(c.Planning(c.ego_limits).NumSamples(), 26);
  EXPECT_EQ(c.Tracker(c.opponent_limits).limits.v_max, 0.61);
}

TEST(SimConfigTest, Validation) {
  SimConfig c;
  c.decision_cycle = 0.7;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = SimConfig{};
  c.opponent_y_max = 2.5;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = SimConfig{};
  c.sample_time = -0.2;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

TEST(ParseControllerTest, Names) {
  EXPECT_EQ(ParseController("mixing"), EgoController::kMixing);
  EXPECT_EQ(ParseController("conventional"), EgoController::kConventional);
  EXPECT_EQ(ToString(EgoController::kConventional), "conventional");
  EXPECT_EQ(ToString(Outcome::kOvertakingSuccess), "overtaking_success");
  EXPECT_THROW(ParseController("greedy"), std::invalid_argument);
}

TEST(EpisodeTest, InitialConditions) {
  const SimConfig c;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Episode e(c, EgoController::kMixing, ConstantLevel{0}, seed);
    EXPECT_EQ(e.ego().x, 2.0);
    EXPECT_EQ(e.ego().y, 1.5);
    EXPECT_LE(e.opponent().x, 2.0);
    EXPECT_GE(e.opponent().x, 0.0);
    EXPECT_GE(e.opponent().y, 1.0);
    EXPECT_LE(e.opponent().y, 2.0);
    EXPECT_EQ(e.step(), 0);
  }
}

TEST(EpisodeTest, LevelZeroOpponentIsBlocked) {
  const EpisodeRecord r = RunEpisode({}, EgoController::kMixing, ConstantLevel{0}, 7);
  EXPECT_EQ(r.outcome, Outcome::kBlockingSuccess);
  EXPECT_FALSE(r.aborted);
  EXPECT_EQ(r.controller, "mixing");
  EXPECT_EQ(r.opponent, "constant:0");
}

TEST(EpisodeTest, StationaryOpponentLastsTheFullEpisode) {
  const EpisodeRecord r = RunEpisode({}, EgoController::kMixing, External{}, 3);
  EXPECT_EQ(r.outcome, Outcome::kBlockingSuccess);
  EXPECT_FALSE(r.collision);
  EXPECT_EQ(r.end_step, 300);
  EXPECT_NEAR(r.end_time, 60.0, 1e-9);
  EXPECT_EQ(r.samples.size(), 301u);
  EXPECT_EQ(r.cycles.size(), 60u);
  for (std::size_t i = 1; i < r.samples.size(); ++i) {
    EXPECT_EQ(r.samples[i].opponent_input.v, 0.0);
  }
}

TEST(EpisodeTest, FastOpponentOnTheFarEdgeOvertakes) {
  SimConfig c;
  c.opponent_limits = {2.0, 2.0};
  c.opponent_y_min = c.opponent_y_max = 2.3;
  const EpisodeRecord r = RunEpisode(c, EgoController::kConventional,
                                     External{std::vector<ControlInput>(300, {2.0, 0.0})}, 1);
  EXPECT_EQ(r.outcome, Outcome::kOvertakingSuccess);
  EXPECT_FALSE(r.collision);
  EXPECT_LT(r.end_step, 300);
  EXPECT_GT(r.samples.back().opponent.x, r.samples.back().ego.x);
  EXPECT_LE(r.samples[r.samples.size() - 2].opponent.x,
            r.samples[r.samples.size() - 2].ego.x);
}

TEST(EpisodeTest, DeterministicForEveryOpponentKind) {
  for (const OpponentModel& m :
       std::vector<OpponentModel>{ConstantLevel{1}, RandomCandidate{}, LevelSwitcher{}}) {
    const EpisodeRecord a = RunEpisode({}, EgoController::kMixing, m, 11);
    const EpisodeRecord b = RunEpisode({}, EgoController::kMixing, m, 11);
    ExpectSameTrace(a, b);
  }
}

TEST(EpisodeTest, SeedsChangeTheRace) {
  const EpisodeRecord a = RunEpisode({}, EgoController::kMixing, RandomCandidate{}, 1);
  const EpisodeRecord b = RunEpisode({}, EgoController::kMixing, RandomCandidate{}, 2);
  EXPECT_NE(a.samples[0].opponent.x, b.samples[0].opponent.x);
}

TEST(EpisodeTest, ReplayingOpponentInputsReproducesTheEpisode) {
  const EpisodeRecord a = RunEpisode({}, EgoController::kMixing, ConstantLevel{2}, 5);
  const EpisodeRecord b =
      RunEpisode({}, EgoController::kMixing, External{a.OpponentInputs()}, 5);
  ExpectSameTrace(a, b);
}

TEST(EpisodeTest, InvariantsHold) {
  const SimConfig c;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const EpisodeRecord r = RunEpisode(c, EgoController::kMixing, RandomCandidate{}, seed);
    for (std::size_t i = 1; i < r.samples.size(); ++i) {
      const SampleRecord& s = r.samples[i];
      EXPECT_GE(s.ego_input.v, 0.0);
      EXPECT_LE(s.ego_input.v, c.ego_limits.v_max);
      EXPECT_LE(std::abs(s.ego_input.omega), c.ego_limits.omega_max);
      EXPECT_LE(s.opponent_input.v, c.opponent_limits.v_max);
      EXPECT_LE(std::abs(s.opponent_input.omega), c.opponent_limits.omega_max);
      EXPECT_TRUE(s.ego.IsFinite());
      EXPECT_TRUE(s.opponent.IsFinite());
      EXPECT_EQ(s.step, static_cast<int>(i));
    }
    for (const CycleRecord& cy : r.cycles) {
      double sum = 0.0;
      for (double b : cy.beliefs) sum += b;
      EXPECT_NEAR(sum, 1.0, 1e-12);
      EXPECT_GE(cy.potential, 0.0);
      EXPECT_LE(cy.potential, 0.2);
      EXPECT_EQ(cy.step % c.CycleSteps(), 0);
      EXPECT_EQ(cy.ego_levels.size(), 4u);
      EXPECT_EQ(cy.opponent_levels.size(), 3u);
      EXPECT_EQ(cy.mixed.samples.size(), 26u);
    }
  }
}

TEST(EpisodeTest, CollisionEndsTheRaceAtTheFirstContact) {
  int seen = 0;
  for (std::uint64_t seed = 1; seed <= 12 && seen < 2; ++seed) {
    const EpisodeRecord r = RunEpisode({}, EgoController::kConventional, ConstantLevel{2}, seed);
    if (!r.collision) continue;
    ++seen;
    EXPECT_EQ(r.outcome, Outcome::kBlockingSuccess);
    const SampleRecord& last = r.samples.back();
    EXPECT_TRUE(DetectCollision(last.ego, last.opponent, 0.3));
    for (std::size_t i = 0; i + 1 < r.samples.size(); ++i) {
      EXPECT_FALSE(DetectCollision(r.samples[i].ego, r.samples[i].opponent, 0.3));
    }
  }
  EXPECT_GT(seen, 0);
}

TEST(EpisodeTest, ConventionalControllerNeverMixes) {
  const EpisodeRecord r = RunEpisode({}, EgoController::kConventional, ConstantLevel{1}, 4);
  for (const CycleRecord& cy : r.cycles) {
    for (std::size_t i = 0; i < cy.mixed.samples.size(); ++i) {
      EXPECT_EQ(cy.mixed.samples[i].y, cy.best.samples[i].y);
    }
  }
}

}  // namespace
}  // namespace duel
