#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "duel/batch.hpp"
#include "duel/sim.hpp"

namespace duel {

struct ReportOptions {
  int max_episodes = 0;  // 0: every log found
};

/// Per-episode SVG plots: <stem>_beliefs.svg, <stem>_potential.svg and
/// <stem>_xy.svg. Returns the files written.
std::vector<std::filesystem::path> WriteEpisodePlots(
    const EpisodeRecord& record, const std::filesystem::path& out_dir,
    const std::string& stem);

/// Grouped bar chart of blocking rates (blocking_rates.svg) plus a text
/// table (blocking_rates.txt).
std::vector<std::filesystem::path> WriteBlockingRatePlot(
    const BatchResult& summary, const std::filesystem::path& out_dir);

/// Scans `log_dir` recursively for *.jsonl episode logs and summary.csv.
/// Throws std::runtime_error if neither exists.
std::vector<std::filesystem::path> GenerateReport(
    const std::filesystem::path& log_dir, const std::filesystem::path& out_dir,
    const ReportOptions& options = {});

}  // namespace duel
