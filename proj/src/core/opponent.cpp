#include "duel/opponent.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "duel/rng.hpp"

namespace duel {
namespace {

template <typename T>
T ParseNumber(const std::string& text, const std::string& spec) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("bad number '" + text + "' in opponent '" + spec + "'");
  }
  return value;
}

double ParseDouble(const std::string& text, const std::string& spec) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw std::invalid_argument("bad number '" + text + "' in opponent '" + spec + "'");
  }
  return value;
}

int CheckLevel(int level, const std::string& spec) {
  if (level < 0 || level > 2) {
    throw std::invalid_argument("opponent level must be 0, 1 or 2 in '" + spec + "'");
  }
  return level;
}

}  // namespace

int LevelSwitcher::LevelAt(double t) const {
  if (schedule.empty()) return 0;
  int level = schedule.front().second;
  for (const auto& [start, l] : schedule) {
    if (start <= t + 1e-9) level = l;
  }
  return level;
}

OpponentModel ParseOpponent(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const bool has_tail = colon != std::string::npos;

  if (head == "constant" && has_tail) {
    return ConstantLevel{CheckLevel(ParseNumber<int>(tail, spec), spec)};
  }
  if (head == "random" && !has_tail) return RandomCandidate{};
  if ((head == "external" || head == "zero") && !has_tail) return External{};
  if (head == "switcher") {
    LevelSwitcher sw;
    if (!has_tail) return sw;
    if (tail.find('@') == std::string::npos) {
      sw.schedule_seed = ParseNumber<std::uint64_t>(tail, spec);
      return sw;
    }
    std::stringstream ss(tail);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto at = item.find('@');
      if (at == std::string::npos) {
        throw std::invalid_argument("switcher entries are LEVEL@TIME in '" + spec + "'");
      }
      sw.schedule.emplace_back(ParseDouble(item.substr(at + 1), spec),
                               CheckLevel(ParseNumber<int>(item.substr(0, at), spec), spec));
    }
    std::stable_sort(sw.schedule.begin(), sw.schedule.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (sw.schedule.empty()) throw std::invalid_argument("empty switch schedule");
    return sw;
  }
  throw std::invalid_argument("unknown opponent '" + spec +
                              "' (expected constant:K, random, switcher[:...], external)");
}

std::string OpponentName(const OpponentModel& model) {
  struct Visitor {
    std::string operator()(const ConstantLevel& m) const {
      return "constant:" + std::to_string(m.level);
    }
    std::string operator()(const RandomCandidate&) const { return "random"; }
    std::string operator()(const LevelSwitcher& m) const {
      if (!m.schedule.empty()) {
        std::ostringstream os;
        os << "switcher:";
        for (std::size_t i = 0; i < m.schedule.size(); ++i) {
          if (i) os << ',';
          os << m.schedule[i].second << '@' << m.schedule[i].first;
        }
        return os.str();
      }
      if (m.schedule_seed) return "switcher:" + std::to_string(*m.schedule_seed);
      return "switcher";
    }
    std::string operator()(const External&) const { return "external"; }
  };
  return std::visit(Visitor{}, model);
}

LevelSwitcher RandomSwitchSchedule(std::uint64_t seed, double switch_min,
                                   double switch_max) {
  Rng rng(seed ^ 0x5bd1e9955bd1e995ULL);
  LevelSwitcher sw;
  int level = rng.Index(3);
  sw.schedule.emplace_back(0.0, level);
  const int switches = 1 + rng.Index(3);
  std::vector<double> times;
  for (int i = 0; i < switches; ++i) times.push_back(rng.Uniform(switch_min, switch_max));
  std::sort(times.begin(), times.end());
  for (double t : times) {
    level = (level + 1 + rng.Index(2)) % 3;
    // Round to the decision grid so a switch never lands mid-cycle.
    sw.schedule.emplace_back(std::round(t), level);
  }
  return sw;
}

}  // namespace duel
