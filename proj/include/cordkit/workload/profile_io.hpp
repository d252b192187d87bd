#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "cordkit/core/csv.hpp"
#include "cordkit/workload/profile.hpp"

namespace cordkit {

// Profile CSV layout:
//
//   # workload: <name>          optional metadata lines, any order
//   # grid: <N_ca>x<N_bw>
//   # interval_ms: <ms>
//   run_id,beta_cache,beta_bw,t_ms,instr,cache_req,cache_miss
//   r0,5,10,0,21000,6300,630
//
// Rows of one (run_id, budget) pair must appear in time order, spaced by the
// file's interval. Counts are per-interval deltas.

inline constexpr std::string_view kProfileHeader = "run_id,beta_cache,beta_bw,t_ms,instr,cache_req,cache_miss";

inline void write_profiles(const ProfileSet& set, std::ostream& os) {
  int interval = set.profiles.empty() ? kDefaultIntervalMs : set.profiles.front().interval_ms;
  for (const auto& p : set.profiles)
    if (p.interval_ms != interval) throw std::invalid_argument("profiles in one file must share an interval");
  os << "# workload: " << set.workload << '\n';
  os << "# grid: " << set.grid_max.cache << 'x' << set.grid_max.bw << '\n';
  os << "# interval_ms: " << interval << '\n';
  os << kProfileHeader << '\n';
  for (const auto& p : set.profiles)
    for (const auto& s : p.samples)
      os << p.run_id << ',' << p.budget.cache << ',' << p.budget.bw << ',' << s.t_ms << ',' << s.instr << ','
         << s.cache_req << ',' << s.cache_miss << '\n';
}

inline void write_profiles(const ProfileSet& set, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_profiles(set, os);
}

/// Reads a profile CSV. A grid passed explicitly overrides the file's metadata.
inline ProfileSet read_profiles(std::istream& is, std::optional<Budget> grid = std::nullopt) {
  ProfileSet set;
  std::optional<int> interval;
  bool header_seen = false;
  std::map<std::pair<std::string, Budget>, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto text = csv::trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      if (header_seen) throw ParseError(lineno, "metadata after header");
      auto body = csv::trim(text.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      const auto key = csv::trim(body.substr(0, colon));
      const auto value = csv::trim(body.substr(colon + 1));
      if (key == "workload") {
        set.workload = std::string(value);
      } else if (key == "grid") {
        const auto x = value.find('x');
        if (x == std::string_view::npos) throw ParseError(lineno, "grid must look like 20x20");
        Budget g{static_cast<int>(csv::to_int(value.substr(0, x), lineno, "grid")),
                 static_cast<int>(csv::to_int(value.substr(x + 1), lineno, "grid"))};
        if (!grid) set.grid_max = g;
      } else if (key == "interval_ms") {
        interval = static_cast<int>(csv::to_int(value, lineno, "interval_ms"));
        if (*interval <= 0) throw ParseError(lineno, "interval must be positive");
      }
      continue;
    }
    if (!header_seen) {
      if (text != kProfileHeader) throw ParseError(lineno, "unexpected header '" + std::string(text) + "'");
      header_seen = true;
      continue;
    }
    const auto f = csv::split(text);
    if (f.size() != 7) throw ParseError(lineno, "expected 7 fields, got " + std::to_string(f.size()));
    if (f[0].empty()) throw ParseError(lineno, "empty run_id");
    ResourceSample s;
    Budget b{static_cast<int>(csv::to_int(f[1], lineno, "beta_cache")),
             static_cast<int>(csv::to_int(f[2], lineno, "beta_bw"))};
    s.t_ms = csv::to_int(f[3], lineno, "t_ms");
    s.instr = csv::to_int(f[4], lineno, "instr");
    s.cache_req = csv::to_int(f[5], lineno, "cache_req");
    s.cache_miss = csv::to_int(f[6], lineno, "cache_miss");
    if (s.instr < 0 || s.cache_req < 0 || s.cache_miss < 0) throw ParseError(lineno, "negative counter");
    if (s.cache_miss > s.cache_req) throw ParseError(lineno, "cache_miss exceeds cache_req");
    const Budget g = grid.value_or(set.grid_max);
    if (b.cache < 1 || b.bw < 1 || exceeds(b, g))
      throw ParseError(lineno, "budget " + b.str() + " outside grid " + g.str());

    auto key = std::make_pair(std::string(f[0]), b);
    auto it = index.find(key);
    if (it == index.end()) {
      ResourceProfile p;
      p.run_id = key.first;
      p.budget = b;
      it = index.emplace(key, set.profiles.size()).first;
      set.profiles.push_back(std::move(p));
    }
    auto& prof = set.profiles[it->second];
    if (!prof.samples.empty()) {
      const auto step = s.t_ms - prof.samples.back().t_ms;
      if (!interval) {
        if (step <= 0) throw ParseError(lineno, "sample times must increase");
        interval = static_cast<int>(step);
      } else if (step != *interval) {
        throw ParseError(lineno, "inconsistent interval: step " + std::to_string(step) + " ms, expected " +
                                     std::to_string(*interval) + " ms");
      }
    }
    prof.samples.push_back(s);
  }
  if (grid) set.grid_max = *grid;
  for (auto& p : set.profiles) p.interval_ms = interval.value_or(kDefaultIntervalMs);
  return set;
}

inline ProfileSet read_profiles(const std::string& path, std::optional<Budget> grid = std::nullopt) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_profiles(is, grid);
}

}  // namespace cordkit
