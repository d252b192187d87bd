#pragma once

#include <string>
#include <vector>

#include "cordkit/cord/base_alloc.hpp"
#include "cordkit/cord/exec.hpp"
#include "cordkit/taskgen/taskset.hpp"

namespace cordkit::baseline {

inline constexpr const char* kBaselineLabel = "density-GEDF";

struct DecomposedSubtask {
  Tick release = 0;  // relative to the task release
  Tick deadline = 0;
  Tick wcet = 0;  // at the even-split budget
};

/// Per-node windows from the proportional path-share rule, driven by the
/// WCETs under the even split.
inline std::vector<DecomposedSubtask> decompose_deadlines(const DagTask& task, const std::vector<Tick>& wcets) {
  const auto windows = cord::proportional_windows(task, wcets);
  std::vector<DecomposedSubtask> out(windows.size());
  for (std::size_t v = 0; v < windows.size(); ++v) out[v] = {windows[v].release, windows[v].deadline, wcets[v]};
  return out;
}

struct DecompVerdict {
  bool schedulable = true;
  double density = 0.0;
  Budget even_split;
  Budget unassigned;  // partitions left over by the floored split
  std::vector<std::string> infeasible;  // "t{task}_v{node}" with e > d - r
};

/// Density test over decomposed subtasks: every subtask fits its window and
/// the summed density e / (d - r) stays within the core count. A
/// sufficient condition for global EDF, so conservative.
inline DecompVerdict decomp_analyze(const Taskset& ts, const Platform& platform, const cord::ModelTable& models) {
  DecompVerdict v;
  v.even_split = platform.even_split();
  v.unassigned = {platform.max_budget.cache - v.even_split.cache * platform.cores,
                  platform.max_budget.bw - v.even_split.bw * platform.cores};
  for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
    const auto& task = ts.tasks[i];
    std::vector<Tick> e;
    e.reserve(task.workloads.size());
    for (const auto& w : task.workloads) e.push_back(models.wcet(models.workload_index(w), v.even_split));
    const auto parts = decompose_deadlines(task, e);
    for (std::size_t n = 0; n < parts.size(); ++n) {
      const Tick window = parts[n].deadline - parts[n].release;
      if (window <= 0 || parts[n].wcet > window) {
        v.schedulable = false;
        v.infeasible.push_back("t" + std::to_string(i) + "_v" + std::to_string(n));
        continue;
      }
      v.density += static_cast<double>(parts[n].wcet) / static_cast<double>(window);
    }
  }
  if (v.density > static_cast<double>(platform.cores)) v.schedulable = false;
  return v;
}

inline bool decomp_schedulable(const Taskset& ts, const Platform& platform, const cord::ModelTable& models) {
  return decomp_analyze(ts, platform, models).schedulable;
}

}  // namespace cordkit::baseline
