#include <gtest/gtest.h>

#include <sstream>

#include "duel/batch.hpp"
#include "temp_dir.hpp"

namespace duel {
namespace {

SimConfig ShortConfig() {
  SimConfig c;
  c.episode_limit = 10.0;
  return c;
}

TEST(BatchTest, SingleRunMatchesRunEpisode) {
  const BatchResult r = RunBatch(ShortConfig(), {EgoController::kMixing}, {"constant:1"}, 1, 4);
  ASSERT_EQ(r.cells.size(), 1u);
  const EpisodeRecord e = RunEpisode(ShortConfig(), EgoController::kMixing, ConstantLevel{1}, 4);
  EXPECT_EQ(r.cells[0].runs, 1);
  EXPECT_EQ(r.cells[0].blocks, e.outcome == Outcome::kBlockingSuccess ? 1 : 0);
  EXPECT_EQ(r.cells[0].collisions, e.collision ? 1 : 0);
  EXPECT_EQ(r.cells[0].controller, "mixing");
  EXPECT_EQ(r.cells[0].opponent, "constant:1");
}

TEST(BatchTest, IndependentOfThreadCount) {
  const std::vector<EgoController> ctl{EgoController::kMixing, EgoController::kConventional};
  const std::vector<std::string> opp{"constant:2", "random"};
  BatchOptions one, three;
  one.threads = 1;
  three.threads = 3;
  const BatchResult a = RunBatch(ShortConfig(), ctl, opp, 3, 1, one);
  const BatchResult b = RunBatch(ShortConfig(), ctl, opp, 3, 1, three);
  std::ostringstream sa, sb;
  WriteSummaryCsv(sa, a, false);
  WriteSummaryCsv(sb, b, false);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.cells.size(), 4u);
}

TEST(BatchTest, WritesLogsAndReportsProgress) {
  testing_util::TempDir dir;
  BatchOptions opts;
  opts.log_dir = dir.path();
  int calls = 0;
  opts.on_episode = [&](const BatchCell&, const EpisodeRecord&) { ++calls; };
  RunBatch(ShortConfig(), {EgoController::kMixing}, {"constant:0"}, 2, 10, opts);
  EXPECT_EQ(calls, 2);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / EpisodeLogName("mixing", "constant:0", 10)));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / EpisodeLogName("mixing", "constant:0", 11)));
}

TEST(BatchTest, RejectsBadArguments) {
  EXPECT_THROW(RunBatch(ShortConfig(), {EgoController::kMixing}, {"constant:0"}, 0, 1),
               std::invalid_argument);
  EXPECT_THROW(RunBatch(ShortConfig(), {EgoController::kMixing}, {"nope"}, 1, 1),
               std::invalid_argument);
}

TEST(SummaryCsvTest, RoundTrip) {
  BatchResult r;
  r.cells.push_back({"mixing", "constant:0", 200, 198, 3, 0, 12.5});
  r.cells.push_back({"conventional", "switcher", 10, 7, 1, 1, 9.25});
  std::stringstream ss;
  WriteSummaryCsv(ss, r);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')),
            "controller,opponent,runs,blocks,blocking_rate,collisions,aborts,mean_decision_ms");
  const BatchResult back = ReadSummaryCsv(ss);
  ASSERT_EQ(back.cells.size(), 2u);
  EXPECT_EQ(back.cells[1].opponent, "switcher");
  EXPECT_EQ(back.cells[1].blocks, 7);
  EXPECT_EQ(back.cells[1].aborts, 1);
  EXPECT_NEAR(back.cells[0].mean_decision_ms, 12.5, 1e-9);
  EXPECT_NEAR(back.cells[1].BlockingRate(), 7.0 / 9, 1e-12);
}

TEST(SummaryCsvTest, TableHasOneRowPerCell) {
  BatchResult r;
  r.cells.push_back({"mixing", "random", 5, 5, 0, 0, 1.0});
  std::ostringstream os;
  PrintSummaryTable(os, r);
  EXPECT_NE(os.str().find("random"), std::string::npos);
  EXPECT_NE(os.str().find("1.000"), std::string::npos);
}

TEST(EpisodeLogNameTest, IsFileSystemSafe) {
  const std::string name = EpisodeLogName("mixing", "switcher:0@0,2@12.5", 3);
  EXPECT_EQ(name.find(':'), std::string::npos);
  EXPECT_EQ(name.find(','), std::string::npos);
  EXPECT_EQ(name.substr(name.size() - 6), ".jsonl");
}

}  // namespace
}  // namespace duel
