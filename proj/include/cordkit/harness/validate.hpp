#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cordkit/cord/schedule_io.hpp"

namespace cordkit::harness {

enum class ViolationKind {
  CoreCount,
  ResourceCap,
  MinBudget,
  Precedence,
  EarlyRelease,
  Incomplete,
  CompletionMismatch,
  VerdictMismatch,
  NonContiguous,
  UnknownSubtask,
  DuplicateEntry,
};

inline const char* violation_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::CoreCount: return "core-count";
    case ViolationKind::ResourceCap: return "resource-cap";
    case ViolationKind::MinBudget: return "min-budget";
    case ViolationKind::Precedence: return "precedence";
    case ViolationKind::EarlyRelease: return "early-release";
    case ViolationKind::Incomplete: return "incomplete";
    case ViolationKind::CompletionMismatch: return "completion-mismatch";
    case ViolationKind::VerdictMismatch: return "verdict-mismatch";
    case ViolationKind::NonContiguous: return "non-contiguous";
    case ViolationKind::UnknownSubtask: return "unknown-subtask";
    case ViolationKind::DuplicateEntry: return "duplicate-entry";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  int segment = -1;  // -1 when not tied to one segment
  std::string subtask;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::map<std::string, double> residuals;  // maxIns minus replayed instructions at completion
  bool pass = true;

  int count(ViolationKind k) const {
    return static_cast<int>(std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == k; }));
  }
};

namespace detail {

struct SegmentView {
  Tick start = 0, end = 0;
  std::vector<std::pair<int, Budget>> entries;  // job index, budget
  std::vector<std::string> unknown;
  bool idle = false;
};

}  // namespace detail

/// Checks a schedule file against the taskset it claims to serve: per
/// segment core count, resource caps and minimum budgets, precedence and
/// release times, then replays instruction accrual through the phase
/// models and compares completions and the verdict with the report.
/// Budgets outside the model grid replay at the nearest grid budget; the
/// cap violation is reported on its own.
inline ValidationReport validate_schedule(const std::vector<cord::ScheduleRow>& rows, const cord::ScheduleReport& report,
                                          const Taskset& ts, const cord::ModelTable& models, const Platform& platform) {
  ValidationReport out;
  auto flag = [&](ViolationKind k, int seg, std::string id, std::string detail) {
    out.violations.push_back({k, seg, std::move(id), std::move(detail)});
  };

  const auto anchor_set = anchors(ts);
  const auto jobs = cord::expand_jobs(ts, anchor_set, models);
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < jobs.size(); ++i) index[jobs[i].id] = static_cast<int>(i);

  // Group consecutive rows with the same interval into segments.
  std::vector<detail::SegmentView> segs;
  for (const auto& row : rows) {
    if (segs.empty() || segs.back().start != row.start || segs.back().end != row.end) {
      if (!segs.empty() && row.start != segs.back().end)
        flag(ViolationKind::NonContiguous, static_cast<int>(segs.size()), row.subtask,
             "starts at " + std::to_string(row.start) + ", previous segment ends at " + std::to_string(segs.back().end));
      segs.push_back({row.start, row.end, {}, {}, false});
    }
    auto& seg = segs.back();
    const int at = static_cast<int>(segs.size()) - 1;
    if (row.subtask == cord::kIdleId) {
      seg.idle = true;
      continue;
    }
    const auto it = index.find(row.subtask);
    if (it == index.end()) {
      flag(ViolationKind::UnknownSubtask, at, row.subtask, "not a subtask of this taskset");
      seg.unknown.push_back(row.subtask);
      continue;
    }
    for (const auto& [j, b] : seg.entries)
      if (j == it->second) flag(ViolationKind::DuplicateEntry, at, row.subtask, "listed twice in one segment");
    seg.entries.emplace_back(it->second, row.budget);
  }

  // Per-segment resource checks.
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const auto& seg = segs[k];
    const int at = static_cast<int>(k);
    if (seg.idle && !seg.entries.empty()) flag(ViolationKind::CoreCount, at, cord::kIdleId.data(), "idle segment has entries");
    if (static_cast<int>(seg.entries.size()) > platform.cores)
      flag(ViolationKind::CoreCount, at, "", std::to_string(seg.entries.size()) + " subtasks on " +
                                                 std::to_string(platform.cores) + " cores");
    Budget sum{0, 0};
    for (const auto& [j, b] : seg.entries) {
      sum += b;
      if (b.cache < 1 || b.bw < 1)
        flag(ViolationKind::MinBudget, at, jobs[static_cast<std::size_t>(j)].id, "budget " + b.str());
      if (seg.start < jobs[static_cast<std::size_t>(j)].anchor)
        flag(ViolationKind::EarlyRelease, at, jobs[static_cast<std::size_t>(j)].id,
             "runs at " + std::to_string(seg.start) + " before anchor " +
                 std::to_string(jobs[static_cast<std::size_t>(j)].anchor));
    }
    if (exceeds(sum, platform.max_budget))
      flag(ViolationKind::ResourceCap, at, "", "total " + sum.str() + " over " + platform.max_budget.str());
  }

  // Replay. A job completes at the end of its last segment.
  const Budget lo{1, 1};
  std::vector<double> ins(jobs.size(), 0.0);
  std::vector<int> boundaries(jobs.size(), 0);
  std::vector<std::optional<Tick>> last_end(jobs.size());
  std::vector<std::optional<Tick>> first_start(jobs.size());
  for (const auto& seg : segs) {
    for (const auto& [j, b] : seg.entries) {
      const auto u = static_cast<std::size_t>(j);
      const Budget clamped{std::clamp(b.cache, lo.cache, platform.max_budget.cache),
                           std::clamp(b.bw, lo.bw, platform.max_budget.bw)};
      ins[u] = cord::compute_ins(models.model(jobs[u].workload, clamped), ins[u], seg.start, seg.end);
      ++boundaries[u];
      if (!first_start[u]) first_start[u] = seg.start;
      last_end[u] = seg.end;
    }
  }

  // Precedence: a job may not run before every predecessor's last segment ends.
  for (std::size_t k = 0; k < segs.size(); ++k)
    for (const auto& [j, b] : segs[k].entries)
      for (int p : jobs[static_cast<std::size_t>(j)].preds) {
        const auto& done_at = last_end[static_cast<std::size_t>(p)];
        if (!done_at || *done_at > segs[k].start)
          flag(ViolationKind::Precedence, static_cast<int>(k), jobs[static_cast<std::size_t>(j)].id,
               "runs at " + std::to_string(segs[k].start) + " before " + jobs[static_cast<std::size_t>(p)].id +
                   " completes");
      }

  // Completions against the report.
  std::map<std::string, const cord::CompletionRecord*> reported;
  for (const auto& s : report.subtasks) {
    if (!index.count(s.id)) flag(ViolationKind::UnknownSubtask, -1, s.id, "reported but not in the taskset");
    reported[s.id] = &s;
  }
  bool expect_schedulable = true;
  for (std::size_t u = 0; u < jobs.size(); ++u) {
    const auto& job = jobs[u];
    const double residual = job.max_ins - ins[u];
    const double tol = std::max(1, boundaries[u]);
    const bool finished = residual <= tol;
    out.residuals[job.id] = residual;
    const auto it = reported.find(job.id);
    const std::optional<Tick> claimed = it == reported.end() ? std::nullopt : it->second->completion;
    if (it == reported.end()) flag(ViolationKind::Incomplete, -1, job.id, "missing from the report");
    if (claimed) {
      if (!finished)
        flag(ViolationKind::Incomplete, -1, job.id, "replay leaves " + csv::format_double(residual) + " instructions");
      else if (last_end[u] != claimed)
        flag(ViolationKind::CompletionMismatch, -1, job.id,
             "reported " + std::to_string(*claimed) + ", replay ends at " +
                 (last_end[u] ? std::to_string(*last_end[u]) : std::string("never")));
    } else if (it != reported.end() && residual <= cord::kDoneTolerance) {
      flag(ViolationKind::CompletionMismatch, -1, job.id, "replay finishes but the report has no completion");
    }
    if (!claimed || !finished || *claimed > job.abs_deadline) expect_schedulable = false;
  }
  if (expect_schedulable != report.schedulable)
    flag(ViolationKind::VerdictMismatch, -1, "",
         std::string("report says ") + (report.schedulable ? "schedulable" : "unschedulable"));

  out.pass = out.violations.empty();
  return out;
}

inline ValidationReport validate_schedule(const std::vector<cord::ScheduleRow>& rows, const cord::ScheduleReport& report,
                                          const Taskset& ts, const phase::ModelBank& bank, const Platform& platform) {
  const cord::ModelTable models(bank, platform.max_budget);
  return validate_schedule(rows, report, ts, models, platform);
}

}  // namespace cordkit::harness
