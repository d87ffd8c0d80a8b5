#include "duel/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace duel {

double BatchCell::BlockingRate() const {
  const int completed = runs - aborts;
  return completed > 0 ? static_cast<double>(blocks) / completed : 0.0;
}

std::string EpisodeLogName(const std::string& controller,
                           const std::string& opponent, std::uint64_t seed) {
  std::string safe = opponent;
  for (char& c : safe) {
    if (c == ':' || c == ',' || c == '@') c = '_';
  }
  return controller + "_" + safe + "_" + std::to_string(seed) + ".jsonl";
}

BatchResult RunBatch(const SimConfig& config,
                     const std::vector<EgoController>& controllers,
                     const std::vector<std::string>& opponents, int n_runs,
                     std::uint64_t base_seed, const BatchOptions& options) {
  if (n_runs < 1) throw std::invalid_argument("RunBatch: n_runs must be >= 1");
  config.Validate();

  struct Job {
    std::size_t cell;
    EgoController controller;
    std::string opponent;
    std::uint64_t seed;
  };
  struct JobOutcome {
    bool blocked = false;
    bool collision = false;
    bool aborted = false;
    double decision_ms = 0.0;
  };

  BatchResult result;
  std::vector<Job> jobs;
  std::vector<OpponentModel> models;
  for (EgoController c : controllers) {
    for (const std::string& o : opponents) {
      const OpponentModel model = ParseOpponent(o);
      BatchCell cell;
      cell.controller = ToString(c);
      cell.opponent = o;
      cell.runs = n_runs;
      result.cells.push_back(cell);
      models.push_back(model);
      for (int r = 0; r < n_runs; ++r) {
        jobs.push_back({result.cells.size() - 1, c, o, base_seed + r});
      }
    }
  }

  std::vector<JobOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const Job& job = jobs[i];
        const EpisodeRecord rec =
            RunEpisode(config, job.controller, models[job.cell], job.seed);
        JobOutcome& out = outcomes[i];
        out.aborted = rec.aborted;
        out.blocked = !rec.aborted && rec.outcome == Outcome::kBlockingSuccess;
        out.collision = rec.collision;
        out.decision_ms = rec.MeanDecisionMs();
        if (options.log_dir) {
          WriteEpisodeLog(*options.log_dir / EpisodeLogName(ToString(job.controller),
                                                            job.opponent, job.seed),
                          rec, {options.log_detail, true});
        }
        if (options.on_episode) {
          std::lock_guard lock(callback_mutex);
          options.on_episode(result.cells[job.cell], rec);
        }
      } catch (...) {
        std::lock_guard lock(callback_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  int threads = options.threads > 0
                    ? options.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min<int>(threads, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  // Aggregate in job order so sums are bit-identical for any thread count.
  std::vector<double> latency_sum(result.cells.size(), 0.0);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    BatchCell& cell = result.cells[jobs[i].cell];
    const JobOutcome& out = outcomes[i];
    cell.blocks += out.blocked;
    cell.collisions += out.collision;
    cell.aborts += out.aborted;
    latency_sum[jobs[i].cell] += out.decision_ms;
  }
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    result.cells[c].mean_decision_ms = latency_sum[c] / result.cells[c].runs;
  }
  return result;
}

void WriteSummaryCsv(std::ostream& os, const BatchResult& result,
                     bool include_latency) {
  os << "controller,opponent,runs,blocks,blocking_rate,collisions,aborts";
  if (include_latency) os << ",mean_decision_ms";
  os << '\n';
  for (const BatchCell& c : result.cells) {
    char rate[32];
    std::snprintf(rate, sizeof(rate), "%.4f", c.BlockingRate());
    os << c.controller << ',' << c.opponent << ',' << c.runs << ',' << c.blocks
       << ',' << rate << ',' << c.collisions << ',' << c.aborts;
    if (include_latency) {
      char ms[32];
      std::snprintf(ms, sizeof(ms), "%.4f", c.mean_decision_ms);
      os << ',' << ms;
    }
    os << '\n';
  }
}

BatchResult ReadSummaryCsv(std::istream& is) {
  BatchResult result;
  std::string line;
  if (!std::getline(is, line) || line.rfind("controller,opponent,", 0) != 0) {
    throw std::runtime_error("summary CSV: missing header");
  }
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() < 7) {
      throw std::runtime_error("summary CSV line " + std::to_string(line_no) +
                               ": expected at least 7 fields");
    }
    BatchCell c;
    c.controller = fields[0];
    c.opponent = fields[1];
    c.runs = std::stoi(fields[2]);
    c.blocks = std::stoi(fields[3]);
    c.collisions = std::stoi(fields[5]);
    c.aborts = std::stoi(fields[6]);
    if (fields.size() > 7) c.mean_decision_ms = std::stod(fields[7]);
    result.cells.push_back(c);
  }
  return result;
}

void PrintSummaryTable(std::ostream& os, const BatchResult& result) {
  os << std::left << std::setw(14) << "controller" << std::setw(14) << "opponent"
     << std::right << std::setw(6) << "runs" << std::setw(8) << "blocks"
     << std::setw(8) << "rate" << std::setw(12) << "collisions" << std::setw(8)
     << "aborts" << std::setw(14) << "decision_ms" << '\n';
  for (const BatchCell& c : result.cells) {
    os << std::left << std::setw(14) << c.controller << std::setw(14) << c.opponent
       << std::right << std::setw(6) << c.runs << std::setw(8) << c.blocks
       << std::setw(8) << std::fixed << std::setprecision(3) << c.BlockingRate()
       << std::setw(12) << c.collisions << std::setw(8) << c.aborts
       << std::setw(14) << std::setprecision(3) << c.mean_decision_ms << '\n';
    os.unsetf(std::ios::fixed);
  }
}

}  // namespace duel
