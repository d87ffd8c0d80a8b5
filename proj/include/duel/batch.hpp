#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "duel/episode_log.hpp"
#include "duel/sim.hpp"

namespace duel {

struct BatchCell {
  std::string controller;
  std::string opponent;
  int runs = 0;
  int blocks = 0;
  int collisions = 0;
  int aborts = 0;
  double mean_decision_ms = 0.0;

  /// Blocks over completed (non-aborted) runs.
  double BlockingRate() const;
};

struct BatchOptions {
  int threads = 0;  // 0: hardware concurrency
  std::optional<std::filesystem::path> log_dir;
  LogDetail log_detail = LogDetail::kCompact;
  /// Called after every finished episode (from worker threads, serialized).
  std::function<void(const BatchCell& cell, const EpisodeRecord& record)> on_episode;
};

struct BatchResult {
  std::vector<BatchCell> cells;
};

/// Runs n_runs episodes per (controller, opponent) cell with seeds
/// base_seed .. base_seed + n_runs - 1. Results do not depend on the
/// thread count.
BatchResult RunBatch(const SimConfig& config,
                     const std::vector<EgoController>& controllers,
                     const std::vector<std::string>& opponents, int n_runs,
                     std::uint64_t base_seed, const BatchOptions& options = {});

/// CSV with columns controller,opponent,runs,blocks,blocking_rate,
/// collisions,aborts,mean_decision_ms.
void WriteSummaryCsv(std::ostream& os, const BatchResult& result,
                     bool include_latency = true);

/// Parses a summary written by WriteSummaryCsv.
BatchResult ReadSummaryCsv(std::istream& is);

/// Fixed-width table for terminals.
void PrintSummaryTable(std::ostream& os, const BatchResult& result);

/// File name used for a batch episode log.
std::string EpisodeLogName(const std::string& controller,
                           const std::string& opponent, std::uint64_t seed);

}  // namespace duel
