#include "duel/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "duel/episode_log.hpp"

namespace duel {
namespace {

namespace fs = std::filesystem;

constexpr const char* kLevelColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c"};

struct Series {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// Minimal line chart with a frame, tick labels and a legend.
class SvgChart {
 public:
  SvgChart(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void SetYRange(double lo, double hi) { y_range_ = {lo, hi}; }
  void SetEqualAspect() { equal_aspect_ = true; }
  void Add(Series s) { series_.push_back(std::move(s)); }

  std::string Render() const {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const Series& s : series_) {
      for (const auto& [x, y] : s.points) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
    if (y_range_) std::tie(y0, y1) = *y_range_;
    if (!(x1 > x0)) { x0 -= 1; x1 += 1; }
    if (!(y1 > y0)) { y0 -= 1; y1 += 1; }

    const double left = 60, top = 30, plot_w = 640, right_pad = 150;
    double plot_h = 300;
    if (equal_aspect_) plot_h = std::clamp(plot_w * (y1 - y0) / (x1 - x0), 80.0, 600.0);
    const double width = left + plot_w + right_pad, height = top + plot_h + 50;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * plot_w; };
    auto py = [&](double y) { return top + plot_h - (y - y0) / (y1 - y0) * plot_h; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left << "\" y=\"18\" font-size=\"14\">" << title_ << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w
       << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
      os << "<text x=\"" << px(xv) << "\" y=\"" << top + plot_h + 15
         << "\" text-anchor=\"middle\">" << Num(xv) << "</text>\n";
      os << "<text x=\"" << left - 5 << "\" y=\"" << py(yv) + 4
         << "\" text-anchor=\"end\">" << Num(yv) << "</text>\n";
    }
    os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 8
       << "\" text-anchor=\"middle\">" << x_label_ << "</text>\n";
    os << "<text x=\"14\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 14 "
       << top + plot_h / 2 << ")\" text-anchor=\"middle\">" << y_label_ << "</text>\n";

    int legend_row = 0;
    for (const Series& s : series_) {
      if (s.points.empty()) continue;
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
      if (s.dashed) os << " stroke-dasharray=\"4 3\"";
      os << " points=\"";
      for (const auto& [x, y] : s.points) os << px(x) << ',' << py(y) << ' ';
      os << "\"/>\n";
      if (!s.label.empty()) {
        const double ly = top + 12 + 16 * legend_row++;
        os << "<line x1=\"" << left + plot_w + 10 << "\" y1=\"" << ly << "\" x2=\""
           << left + plot_w + 30 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
           << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << left + plot_w + 35 << "\" y=\"" << ly + 4 << "\">"
           << s.label << "</text>\n";
      }
    }
    os << "</svg>\n";
    return os.str();
  }

 private:
  std::string title_, x_label_, y_label_;
  std::optional<std::pair<double, double>> y_range_;
  bool equal_aspect_ = false;
  std::vector<Series> series_;
};

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

}  // namespace

std::vector<fs::path> WriteEpisodePlots(const EpisodeRecord& record,
                                        const fs::path& out_dir,
                                        const std::string& stem) {
  fs::create_directories(out_dir);
  const std::string caption = record.controller + " vs " + record.opponent +
                              ", seed " + std::to_string(record.seed) + " (" +
                              ToString(record.outcome) + ")";
  std::vector<fs::path> written;

  SvgChart beliefs("Opponent level belief: " + caption, "time [s]", "belief");
  beliefs.SetYRange(0.0, 1.0);
  for (int k = 0; k < kOpponentLevels; ++k) {
    Series s{"level " + std::to_string(k), kLevelColors[k], {}};
    for (const CycleRecord& c : record.cycles) s.points.emplace_back(c.t, c.beliefs[k]);
    beliefs.Add(std::move(s));
  }
  written.push_back(out_dir / (stem + "_beliefs.svg"));
  WriteFile(written.back(), beliefs.Render());

  SvgChart potential("Level-change potential: " + caption, "time [s]", "potential");
  double limit = 0.2;
  for (const CycleRecord& c : record.cycles) limit = std::max(limit, c.potential);
  potential.SetYRange(0.0, limit * 1.1);
  Series ps{"potential", "#d62728", {}};
  for (const CycleRecord& c : record.cycles) ps.points.emplace_back(c.t, c.potential);
  potential.Add(std::move(ps));
  written.push_back(out_dir / (stem + "_potential.svg"));
  WriteFile(written.back(), potential.Render());

  SvgChart xy("Paths: " + caption, "x [m]", "y [m]");
  xy.SetEqualAspect();
  Series ego{"ego", "#1f4fd1", {}}, opp{"opponent", "#d11f1f", {}};
  for (const SampleRecord& s : record.samples) {
    ego.points.emplace_back(s.ego.x, s.ego.y);
    opp.points.emplace_back(s.opponent.x, s.opponent.y);
  }
  xy.Add(std::move(ego));
  xy.Add(std::move(opp));
  // Planned trajectories (full-detail logs only): one mixed polyline per cycle.
  bool first = true;
  for (const CycleRecord& c : record.cycles) {
    if (c.mixed.samples.empty()) continue;
    Series m{first ? "planned (mixed)" : "", "#7aa6ff", {}, true};
    for (const TrajectorySample& p : c.mixed.samples) m.points.emplace_back(p.x, p.y);
    xy.Add(std::move(m));
    first = false;
  }
  written.push_back(out_dir / (stem + "_xy.svg"));
  WriteFile(written.back(), xy.Render());
  return written;
}

std::vector<fs::path> WriteBlockingRatePlot(const BatchResult& summary,
                                            const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<std::string> opponents, controllers;
  std::map<std::pair<std::string, std::string>, double> rate;
  for (const BatchCell& c : summary.cells) {
    if (std::find(opponents.begin(), opponents.end(), c.opponent) == opponents.end()) {
      opponents.push_back(c.opponent);
    }
    if (std::find(controllers.begin(), controllers.end(), c.controller) == controllers.end()) {
      controllers.push_back(c.controller);
    }
    rate[{c.controller, c.opponent}] = c.BlockingRate();
  }

  const double left = 60, top = 30, plot_h = 260, group_w = 120;
  const double plot_w = group_w * std::max<std::size_t>(1, opponents.size());
  const double bar_w = (group_w - 20) / std::max<std::size_t>(1, controllers.size());
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + plot_w + 160
     << "\" height=\"" << top + plot_h + 50
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << left << "\" y=\"18\" font-size=\"14\">Blocking rate</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = top + plot_h - plot_h * i / 4.0;
    os << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + plot_w
       << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>\n"
       << "<text x=\"" << left - 5 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
       << Num(i / 4.0) << "</text>\n";
  }
  const char* colors[] = {"#1f4fd1", "#999999", "#2ca02c", "#ff7f0e"};
  for (std::size_t g = 0; g < opponents.size(); ++g) {
    const double gx = left + g * group_w + 10;
    for (std::size_t c = 0; c < controllers.size(); ++c) {
      const auto it = rate.find({controllers[c], opponents[g]});
      if (it == rate.end()) continue;
      const double h = plot_h * it->second;
      os << "<rect x=\"" << gx + c * bar_w << "\" y=\"" << top + plot_h - h
         << "\" width=\"" << bar_w - 2 << "\" height=\"" << h << "\" fill=\""
         << colors[c % 4] << "\"/>\n"
         << "<text x=\"" << gx + c * bar_w + bar_w / 2 << "\" y=\"" << top + plot_h - h - 3
         << "\" text-anchor=\"middle\" font-size=\"9\">" << Num(100 * it->second)
         << "%</text>\n";
    }
    os << "<text x=\"" << gx + (group_w - 20) / 2 << "\" y=\"" << top + plot_h + 15
       << "\" text-anchor=\"middle\">" << opponents[g] << "</text>\n";
  }
  for (std::size_t c = 0; c < controllers.size(); ++c) {
    const double ly = top + 12 + 16 * c;
    os << "<rect x=\"" << left + plot_w + 10 << "\" y=\"" << ly - 6
       << "\" width=\"12\" height=\"12\" fill=\"" << colors[c % 4] << "\"/>\n"
       << "<text x=\"" << left + plot_w + 28 << "\" y=\"" << ly + 4 << "\">"
       << controllers[c] << "</text>\n";
  }
  os << "</svg>\n";

  std::vector<fs::path> written{out_dir / "blocking_rates.svg", out_dir / "blocking_rates.txt"};
  WriteFile(written[0], os.str());
  std::ostringstream table;
  PrintSummaryTable(table, summary);
  WriteFile(written[1], table.str());
  return written;
}

std::vector<fs::path> GenerateReport(const fs::path& log_dir, const fs::path& out_dir,
                                     const ReportOptions& options) {
  if (!fs::is_directory(log_dir)) {
    throw std::runtime_error("log directory " + log_dir.string() + " does not exist");
  }
  std::vector<fs::path> logs;
  std::optional<fs::path> summary;
  for (const auto& entry : fs::recursive_directory_iterator(log_dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() == ".jsonl") logs.push_back(entry.path());
    if (entry.path().filename() == "summary.csv" && !summary) summary = entry.path();
  }
  if (logs.empty() && !summary) {
    throw std::runtime_error("no episode logs or summary.csv under " + log_dir.string());
  }
  std::sort(logs.begin(), logs.end());
  if (options.max_episodes > 0 && static_cast<int>(logs.size()) > options.max_episodes) {
    logs.resize(options.max_episodes);
  }

  std::vector<fs::path> written;
  for (const fs::path& log : logs) {
    const EpisodeRecord rec = ReadEpisodeLog(log);
    auto files = WriteEpisodePlots(rec, out_dir, log.stem().string());
    written.insert(written.end(), files.begin(), files.end());
  }
  if (summary) {
    std::ifstream is(*summary);
    auto files = WriteBlockingRatePlot(ReadSummaryCsv(is), out_dir);
    written.insert(written.end(), files.begin(), files.end());
  }
  return written;
}

}  // namespace duel
