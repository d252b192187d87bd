#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cordkit/cord/instance.hpp"

namespace cordkit::cord {

enum class BaseMode { Greedy, DeadlineAware };

inline const char* base_mode_name(BaseMode m) { return m == BaseMode::Greedy ? "greedy" : "deadline-aware"; }

/// Release and deadline of each node relative to the task's release.
struct NodeWindow {
  Tick release = 0;
  Tick deadline = 0;
};

/// Splits the relative deadline along source-to-sink paths in proportion
/// to the node WCETs. A node's share is D * e / L where L is the longest
/// path through it, which is the smallest proportional share it receives
/// on any path. Windows then chain: release = latest predecessor deadline.
inline std::vector<NodeWindow> proportional_windows(const DagTask& task, const std::vector<Tick>& wcets) {
  const auto order = task.topological_order();
  const auto preds = task.predecessors();
  const auto succs = task.successors();
  const std::size_t n = wcets.size();
  if (n != static_cast<std::size_t>(task.size())) throw std::invalid_argument("one WCET per node required");
  std::vector<double> head(n, 0.0), tail(n, 0.0);  // longest path ending / starting at v, inclusive
  for (int v : order) {
    double best = 0.0;
    for (int p : preds[static_cast<std::size_t>(v)]) best = std::max(best, head[static_cast<std::size_t>(p)]);
    head[static_cast<std::size_t>(v)] = best + static_cast<double>(wcets[static_cast<std::size_t>(v)]);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    double best = 0.0;
    for (int s : succs[static_cast<std::size_t>(*it)]) best = std::max(best, tail[static_cast<std::size_t>(s)]);
    tail[static_cast<std::size_t>(*it)] = best + static_cast<double>(wcets[static_cast<std::size_t>(*it)]);
  }
  const double deadline = static_cast<double>(task.deadline);
  std::vector<double> rel(n, 0.0), dl(n, 0.0);
  for (int v : order) {
    const auto u = static_cast<std::size_t>(v);
    const double e = static_cast<double>(wcets[u]);
    const double longest = head[u] + tail[u] - e;
    const double share = longest > 0.0 ? deadline * e / longest : deadline;
    double r = 0.0;
    for (int p : preds[u]) r = std::max(r, dl[static_cast<std::size_t>(p)]);
    rel[u] = r;
    dl[u] = std::min(r + share, deadline);
  }
  std::vector<NodeWindow> out(n);
  for (std::size_t v = 0; v < n; ++v)
    out[v] = {static_cast<Tick>(std::floor(rel[v])), static_cast<Tick>(std::floor(dl[v]))};
  return out;
}

/// Smallest budget reached by dropping one partition at a time, cheapest
/// WCET increase first (ties: cache), while release + WCET stays within
/// the deadline. Empty when even the maximum budget misses it.
inline std::optional<Budget> minimal_budget(const ModelTable& models, int workload, Tick release, Tick deadline) {
  Budget b = models.max_budget();
  if (release + models.wcet(workload, b) > deadline) return std::nullopt;
  for (;;) {
    int pick = -1;
    Tick best = 0;
    for (int t = 0; t < kResourceTypes; ++t) {
      if (b[t] <= 1) continue;
      const Tick e = models.wcet(workload, b - unit_budget(t));
      if (release + e > deadline) continue;
      if (pick < 0 || e < best) pick = t, best = e;
    }
    if (pick < 0) return b;
    b -= unit_budget(pick);
  }
}

struct BaseAllocResult {
  bool feasible = true;
  std::vector<std::string> infeasible;  // subtask ids that miss even at the maximum budget
};

/// Fills r, d, base and beta of every job in place.
inline BaseAllocResult base_alloc(std::vector<SubtaskInstance>& jobs, const Taskset& ts, const ModelTable& models,
                                  BaseMode mode) {
  BaseAllocResult res;
  if (mode == BaseMode::Greedy) {
    // Jobs of one instance are contiguous and node order need not be
    // topological, so walk each instance in topological order.
    std::size_t at = 0;
    while (at < jobs.size()) {
      const auto& task = ts.tasks[static_cast<std::size_t>(jobs[at].task)];
      for (int v : task.topological_order()) {
        auto& s = jobs[at + static_cast<std::size_t>(v)];
        s.base = s.beta = kMinBudget;
        Tick r = s.anchor;
        for (int p : s.preds) r = std::max(r, jobs[static_cast<std::size_t>(p)].d);
        s.r = r;
        s.d = r + models.wcet(s.workload, kMinBudget);
        s.d_init = s.d;
      }
      at += static_cast<std::size_t>(task.size());
    }
    return res;
  }
  std::vector<std::vector<NodeWindow>> windows;
  for (const auto& task : ts.tasks) {
    std::vector<Tick> e;
    for (const auto& w : task.workloads) e.push_back(models.wcet(models.workload_index(w), models.max_budget()));
    windows.push_back(proportional_windows(task, e));
  }
  for (auto& s : jobs) {
    const auto& w = windows[static_cast<std::size_t>(s.task)][static_cast<std::size_t>(s.node)];
    s.r = s.anchor + w.release;
    s.d = s.anchor + w.deadline;
    s.d_init = s.d;
    const auto b = minimal_budget(models, s.workload, s.r, s.d);
    if (!b) {
      res.feasible = false;
      res.infeasible.push_back(s.id);
      s.base = s.beta = models.max_budget();
    } else {
      s.base = s.beta = *b;
    }
  }
  return res;
}

}  // namespace cordkit::cord
