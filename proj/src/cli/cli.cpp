#include "duel/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "duel/batch.hpp"
#include "duel/config.hpp"
#include "duel/episode_log.hpp"
#include "duel/report.hpp"
#include "duel/server/server.hpp"

namespace duel {

namespace {

const std::vector<std::string> kDefaultOpponents{"constant:0", "constant:1", "constant:2",
                                                 "random", "switcher"};

// Flags shared by every subcommand. Unset optionals leave lower-precedence
// values alone.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::vector<std::string> opponents;
  std::vector<std::string> controllers;
  std::optional<std::string> out;
  std::optional<int> serve_port;
  std::optional<int> threads;
  std::optional<std::string> log_detail;
  std::optional<std::string> ui_dir;
  std::string logs;
};

void AddCommonFlags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "YAML config file");
  cmd->add_option("--seed", f.seed, "Episode seed (batch: base seed)");
  cmd->add_option("--out", f.out, "Output directory");
}

AppConfig Resolve(const Flags& f, const EnvLookup& env) {
  AppConfig config;
  if (!f.config.empty()) config = LoadConfigFile(f.config, config);
  ApplyEnvironment(config, env);
  if (f.seed) config.run.seed = *f.seed;
  if (f.runs) config.run.runs = *f.runs;
  if (!f.opponents.empty()) config.run.opponent = f.opponents.front();
  if (!f.controllers.empty()) config.run.controller = f.controllers.front();
  if (f.out) config.run.out = *f.out;
  if (f.threads) config.run.threads = *f.threads;
  if (f.serve_port) config.server.port = *f.serve_port;
  if (f.ui_dir) config.server.ui_dir = *f.ui_dir;
  if (f.log_detail) {
    if (*f.log_detail == "full") config.run.batch_log_detail = LogDetail::kFull;
    else if (*f.log_detail == "compact") config.run.batch_log_detail = LogDetail::kCompact;
    else throw ConfigError("--log-detail: expected full or compact, got '" + *f.log_detail + "'");
  }
  config.sim.Validate();
  ParseController(config.run.controller);
  ParseOpponent(config.run.opponent);
  if (config.run.runs < 1) throw ConfigError("runs must be at least 1");
  return config;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

int CmdRun(const AppConfig& config, std::ostream& out) {
  const EgoController controller = ParseController(config.run.controller);
  const OpponentModel opponent = ParseOpponent(config.run.opponent);
  const EpisodeRecord record = RunEpisode(config.sim, controller, opponent, config.run.seed);
  std::filesystem::create_directories(config.run.out);
  const auto path = config.run.out / EpisodeLogName(record.controller, record.opponent, record.seed);
  WriteEpisodeLog(path, record);

  out << "cycle      t   b(L0)  b(L1)  b(L2)    P_c  est  fail  best  opp_level\n";
  for (std::size_t i = 0; i < record.cycles.size(); ++i) {
    const CycleRecord& c = record.cycles[i];
    out << (i < 10 ? "    " : i < 100 ? "   " : "  ") << i << "  " << Fixed(c.t, 1) << "   "
        << Fixed(c.beliefs[0], 3) << "  " << Fixed(c.beliefs[1], 3) << "  "
        << Fixed(c.beliefs[2], 3) << "  " << Fixed(c.potential, 3) << "    "
        << c.estimated_level << "     " << c.failsafe_level << "     " << c.best_index
        << "     " << (c.opponent_plan_level ? std::to_string(*c.opponent_plan_level) : "-")
        << "\n";
  }
  out << "controller: " << record.controller << "\n"
      << "opponent: " << record.opponent << "\n"
      << "seed: " << record.seed << "\n"
      << "end time: " << Fixed(record.end_time, 1) << " s\n"
      << "collision: " << (record.collision ? "yes" : "no") << "\n"
      << "mean decision: " << Fixed(record.MeanDecisionMs(), 3) << " ms\n"
      << "log: " << path.string() << "\n";
  if (record.aborted) {
    out << "aborted: " << record.abort_reason << "\n";
    return 1;
  }
  out << ToString(record.outcome) << "\n";
  return 0;
}

int CmdBatch(const AppConfig& config, const Flags& f, std::ostream& out, std::ostream& err) {
  std::vector<EgoController> controllers;
  if (f.controllers.empty()) {
    controllers = {EgoController::kMixing, EgoController::kConventional};
  } else {
    for (const auto& c : f.controllers) controllers.push_back(ParseController(c));
  }
  const std::vector<std::string> opponents = f.opponents.empty() ? kDefaultOpponents : f.opponents;
  for (const auto& o : opponents) ParseOpponent(o);

  BatchOptions options;
  options.threads = config.run.threads;
  options.log_dir = config.run.out / "logs";
  options.log_detail = config.run.batch_log_detail;
  const int total = static_cast<int>(controllers.size() * opponents.size()) * config.run.runs;
  int done = 0;
  options.on_episode = [&](const BatchCell&, const EpisodeRecord&) {
    if (++done % 50 == 0 || done == total) err << "\r" << done << "/" << total << " episodes" << std::flush;
  };
  const BatchResult result =
      RunBatch(config.sim, controllers, opponents, config.run.runs, config.run.seed, options);
  err << "\n";
  const auto csv = config.run.out / "summary.csv";
  std::ofstream os(csv);
  if (!os) throw std::runtime_error("cannot write " + csv.string());
  WriteSummaryCsv(os, result);
  PrintSummaryTable(out, result);
  out << "summary: " << csv.string() << "\n";
  int aborts = 0;
  for (const auto& c : result.cells) aborts += c.aborts;
  if (aborts > 0) err << "warning: " << aborts << " aborted episodes\n";
  return 0;
}

int CmdReport(const AppConfig& config, const Flags& f, std::ostream& out) {
  const std::filesystem::path logs = f.logs.empty() ? config.run.out : std::filesystem::path(f.logs);
  if (!std::filesystem::is_directory(logs))
    throw std::runtime_error("log directory not found: " + logs.string());
  const auto dir = config.run.out / "report";
  const auto files = GenerateReport(logs, dir);
  for (const auto& p : files) out << p.string() << "\n";
  out << files.size() << " files written to " << dir.string() << "\n";
  return 0;
}

int CmdServe(const AppConfig& config, std::ostream& out) {
  server::Server srv(config, config.run.out / "sessions");
  srv.Start();
  out << "serving on http://" << config.server.bind_address << ":" << srv.port()
      << " (WebSocket /ws, health /health)" << std::endl;
  srv.Wait();
  return 0;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
           const EnvLookup& env) {
  CLI::App app{"Level-K racing duel: blocking controller simulator", "duel"};
  app.require_subcommand(1);
  app.footer(
      "Precedence: command-line flag > DUEL_* environment > --config file > default.\n"
      "Environment: DUEL_SEED DUEL_RUNS DUEL_OPPONENT DUEL_CONTROLLER DUEL_OUT\n"
      "             DUEL_THREADS DUEL_SERVE_PORT");
  Flags f;

  auto* run = app.add_subcommand("run", "Run one episode and write its log");
  AddCommonFlags(run, f);
  run->add_option("--opponent", f.opponents,
                  "constant:K | random | switcher[:SEED|:L@T,...] | zero")
      ->expected(1);
  run->add_option("--controller", f.controllers, "mixing | conventional")->expected(1);

  auto* batch = app.add_subcommand("batch", "Run the controller x opponent matrix");
  AddCommonFlags(batch, f);
  batch->add_option("--runs", f.runs, "Episodes per cell");
  batch->add_option("--opponent", f.opponents, "Opponent (repeatable; default all five)");
  batch->add_option("--controller", f.controllers, "Controller (repeatable; default both)");
  batch->add_option("--threads", f.threads, "Worker threads (0: all cores)");
  batch->add_option("--log-detail", f.log_detail, "Episode log detail: compact | full");

  auto* report = app.add_subcommand("report", "Plot beliefs, potential, paths and rates");
  AddCommonFlags(report, f);
  report->add_option("--logs", f.logs, "Directory with episode logs (default: --out)");

  auto* serve = app.add_subcommand("serve", "Host live sessions against a human driver");
  AddCommonFlags(serve, f);
  serve->add_option("--serve-port", f.serve_port, "TCP port (0: any free port)");
  serve->add_option("--controller", f.controllers, "mixing | conventional")->expected(1);
  serve->add_option("--ui-dir", f.ui_dir, "Static cockpit bundle to serve");

  auto* show = app.add_subcommand("config", "Print the resolved configuration as YAML");
  AddCommonFlags(show, f);
  show->add_option("--runs", f.runs, "Episodes per cell");
  show->add_option("--opponent", f.opponents, "Opponent")->expected(1);
  show->add_option("--controller", f.controllers, "Controller")->expected(1);
  show->add_option("--serve-port", f.serve_port, "TCP port");

  std::vector<const char*> argv{"duel"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  AppConfig config;
  try {
    config = Resolve(f, env);
  } catch (const std::exception& e) {
    err << "duel: " << e.what() << "\n";
    return 2;
  }
  try {
    if (*run) return CmdRun(config, out);
    if (*batch) return CmdBatch(config, f, out, err);
    if (*report) return CmdReport(config, f, out);
    if (*serve) return CmdServe(config, out);
    out << DumpConfig(config);
    return 0;
  } catch (const std::exception& e) {
    err << "duel: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace duel
