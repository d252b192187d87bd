#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cordkit/core/csv.hpp"
#include "cordkit/cord/scheduler.hpp"

namespace cordkit::cord {

inline constexpr std::string_view kScheduleHeader = "seg_start_us,seg_end_us,subtask_id,beta_cache,beta_bw";
inline constexpr std::string_view kIdleId = "idle";

/// Schedule as read back from disk, keyed by subtask id.
struct ScheduleRow {
  Tick start = 0, end = 0;
  std::string subtask;  // kIdleId for idle segments
  Budget budget{0, 0};
};

struct CompletionRecord {
  std::string id;
  Tick release = 0;
  std::optional<Tick> completion;
  Tick deadline = 0;
  Budget base{1, 1};
};

struct ScheduleReport {
  bool schedulable = false;
  std::string mode;
  Tick hyperperiod = 0;
  std::string diagnostic;
  std::vector<CompletionRecord> subtasks;
};

inline void write_schedule(const CordResult& r, std::ostream& os) {
  os << kScheduleHeader << '\n';
  for (const auto& seg : r.segments) {
    if (seg.entries.empty()) {
      os << seg.start << ',' << seg.end << ',' << kIdleId << ",0,0\n";
      continue;
    }
    for (const auto& e : seg.entries)
      os << seg.start << ',' << seg.end << ',' << r.jobs[static_cast<std::size_t>(e.subtask)].id << ','
         << e.budget.cache << ',' << e.budget.bw << '\n';
  }
}

inline std::vector<ScheduleRow> read_schedule(std::istream& is) {
  std::vector<ScheduleRow> rows;
  std::string line;
  std::size_t no = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++no;
    const auto t = csv::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header) {
      if (t != kScheduleHeader) throw ParseError(no, "unexpected schedule header");
      header = true;
      continue;
    }
    const auto f = csv::split(t);
    if (f.size() != 5) throw ParseError(no, "expected 5 fields");
    ScheduleRow r;
    r.start = csv::to_int(f[0], no, "seg_start_us");
    r.end = csv::to_int(f[1], no, "seg_end_us");
    r.subtask = std::string(f[2]);
    r.budget = {static_cast<int>(csv::to_int(f[3], no, "beta_cache")), static_cast<int>(csv::to_int(f[4], no, "beta_bw"))};
    if (r.end <= r.start) throw ParseError(no, "segment ends before it starts");
    rows.push_back(std::move(r));
  }
  if (!header) throw ParseError(no, "missing schedule header");
  return rows;
}

/// Rows of an in-memory schedule, as they would be written.
inline std::vector<ScheduleRow> schedule_rows(const CordResult& r) {
  std::stringstream ss;
  write_schedule(r, ss);
  return read_schedule(ss);
}

inline ScheduleReport make_report(const CordResult& r, const std::string& mode) {
  ScheduleReport rep;
  rep.schedulable = r.schedulable;
  rep.mode = mode;
  rep.hyperperiod = r.hyperperiod;
  rep.diagnostic = r.diagnostic;
  for (const auto& s : r.jobs)
    rep.subtasks.push_back({s.id, s.r, s.done ? std::optional<Tick>(s.c) : std::nullopt, s.abs_deadline, s.base});
  return rep;
}

inline nlohmann::json report_to_json(const ScheduleReport& rep) {
  nlohmann::json j{{"schedulable", rep.schedulable},
                   {"mode", rep.mode},
                   {"hyperperiod_us", rep.hyperperiod},
                   {"diagnostic", rep.diagnostic},
                   {"subtasks", nlohmann::json::array()}};
  for (const auto& s : rep.subtasks) {
    nlohmann::json js{{"id", s.id},
                      {"release_us", s.release},
                      {"deadline_us", s.deadline},
                      {"base_budget", {s.base.cache, s.base.bw}}};
    js["completion_us"] = s.completion ? nlohmann::json(*s.completion) : nlohmann::json(nullptr);
    j["subtasks"].push_back(js);
  }
  return j;
}

inline ScheduleReport report_from_json(const nlohmann::json& j) {
  ScheduleReport rep;
  rep.schedulable = j.at("schedulable").get<bool>();
  rep.mode = j.value("mode", std::string());
  rep.hyperperiod = j.value("hyperperiod_us", Tick{0});
  rep.diagnostic = j.value("diagnostic", std::string());
  for (const auto& js : j.at("subtasks")) {
    CompletionRecord s;
    s.id = js.at("id").get<std::string>();
    s.release = js.value("release_us", Tick{0});
    s.deadline = js.at("deadline_us").get<Tick>();
    if (!js.at("completion_us").is_null()) s.completion = js.at("completion_us").get<Tick>();
    if (js.contains("base_budget")) s.base = {js["base_budget"].at(0).get<int>(), js["base_budget"].at(1).get<int>()};
    rep.subtasks.push_back(std::move(s));
  }
  return rep;
}

}  // namespace cordkit::cord
