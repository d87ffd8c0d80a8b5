#include <gtest/gtest.h>

#include "json.hpp"
#include <sstream>

#include "duel/episode_log.hpp"
#include "temp_dir.hpp"

namespace duel {
namespace {

const EpisodeRecord& Sample() {
  static const EpisodeRecord r = RunEpisode({}, EgoController::kMixing, ConstantLevel{1}, 9);
  return r;
}

TEST(EpisodeLogTest, FullRoundTripIsExact) {
  std::stringstream ss;
  WriteEpisodeLog(ss, Sample());
  const EpisodeRecord back = ReadEpisodeLog(ss);
  const EpisodeRecord& r = Sample();
  EXPECT_EQ(back.seed, r.seed);
  EXPECT_EQ(back.controller, r.controller);
  EXPECT_EQ(back.opponent, r.opponent);
  EXPECT_EQ(back.outcome, r.outcome);
  EXPECT_EQ(back.collision, r.collision);
  EXPECT_EQ(back.end_step, r.end_step);
  EXPECT_EQ(back.clamp_events, r.clamp_events);
  ASSERT_EQ(back.samples.size(), r.samples.size());
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].ego.x, r.samples[i].ego.x);
    EXPECT_EQ(back.samples[i].opponent.theta, r.samples[i].opponent.theta);
    EXPECT_EQ(back.samples[i].ego_input.omega, r.samples[i].ego_input.omega);
  }
  ASSERT_EQ(back.cycles.size(), r.cycles.size());
  for (std::size_t i = 0; i < r.cycles.size(); ++i) {
    EXPECT_EQ(back.cycles[i].beliefs, r.cycles[i].beliefs);
    EXPECT_EQ(back.cycles[i].matched_level, r.cycles[i].matched_level);
    EXPECT_EQ(back.cycles[i].ego_levels, r.cycles[i].ego_levels);
    ASSERT_EQ(back.cycles[i].mixed.samples.size(), r.cycles[i].mixed.samples.size());
    EXPECT_EQ(back.cycles[i].mixed.samples[7].y, r.cycles[i].mixed.samples[7].y);
  }
}

TEST(EpisodeLogTest, LinesFollowTheSchema) {
  std::stringstream ss;
  WriteEpisodeLog(ss, Sample());
  std::string line;
  std::vector<std::string> types;
  while (std::getline(ss, line)) {
    types.push_back(nlohmann::json::parse(line).at("type"));
  }
  EXPECT_EQ(types.front(), "header");
  EXPECT_EQ(types.back(), "result");
  EXPECT_EQ(std::count(types.begin(), types.end(), "sample"),
            static_cast<long>(Sample().samples.size()));
  EXPECT_EQ(std::count(types.begin(), types.end(), "cycle"),
            static_cast<long>(Sample().cycles.size()));
  // A cycle line directly follows the sample of its step.
  for (std::size_t i = 1; i < types.size(); ++i) {
    if (types[i] == "cycle") EXPECT_EQ(types[i - 1], "sample");
  }
}

TEST(EpisodeLogTest, CompactOmitsPlansAndLatencyCanBeDropped) {
  std::stringstream ss;
  WriteEpisodeLog(ss, Sample(), {LogDetail::kCompact, false});
  const std::string text = ss.str();
  EXPECT_EQ(text.find("\"mixed\""), std::string::npos);
  EXPECT_EQ(text.find("decision_ms"), std::string::npos);
  const EpisodeRecord back = ReadEpisodeLog(ss);
  EXPECT_EQ(back.cycles.size(), Sample().cycles.size());
  EXPECT_TRUE(back.cycles[0].mixed.samples.empty());
}

TEST(EpisodeLogTest, ErrorsCarryLineNumbers) {
  std::stringstream good;
  WriteEpisodeLog(good, Sample());
  std::string first;
  std::getline(good, first);

  std::stringstream bad(first + "\n{\"type\":\"sample\",\"step\":0}\n");
  try {
    ReadEpisodeLog(bad);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }

  std::stringstream garbage(first + "\n\nnot json\n");
  try {
    ReadEpisodeLog(garbage);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }

  std::stringstream schema("{\"type\":\"header\",\"schema\":\"duel-episode/9\"}\n");
  EXPECT_THROW(ReadEpisodeLog(schema), std::runtime_error);
  std::stringstream truncated(first + "\n");
  EXPECT_THROW(ReadEpisodeLog(truncated), std::runtime_error);
}

TEST(EpisodeLogTest, FileRoundTrip) {
  testing_util::TempDir dir;
  const auto path = dir.path() / "a.jsonl";
  WriteEpisodeLog(path, Sample());
  EXPECT_EQ(ReadEpisodeLog(path).end_step, Sample().end_step);
  EXPECT_THROW(ReadEpisodeLog(dir.path() / "missing.jsonl"), std::runtime_error);
}

TEST(EpisodeLogTest, TrajectoryJson) {
  Trajectory t;
  t.samples = {{0.0, 1.0, 2.0}, {0.2, 1.5, 2.5}};
  EXPECT_EQ(nlohmann::json::parse(TrajectoryToJson(t)),
            nlohmann::json::parse("[[0,1,2],[0.2,1.5,2.5]]"));
}

}  // namespace
}  // namespace duel
