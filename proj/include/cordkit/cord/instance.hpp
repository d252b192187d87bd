#pragma once

#include <string>
#include <vector>

#include "cordkit/core/budget.hpp"
#include "cordkit/core/time.hpp"
#include "cordkit/cord/exec.hpp"
#include "cordkit/taskgen/taskset.hpp"

namespace cordkit::cord {

/// One node of one task instance within the hyper-period.
struct SubtaskInstance {
  std::string id;
  int task = 0;
  int instance = 1;  // k, 1-based
  int node = 0;
  int workload = 0;  // index into the model table
  double max_ins = 0.0;
  std::vector<int> preds, succs;  // indices into the job list
  Tick anchor = 0;                // (k-1) P
  Tick abs_deadline = 0;          // (k-1) P + D
  Tick r = 0, d = 0, c = 0;
  Tick d_init = 0;
  double ins = 0.0;
  bool done = false;
  Budget base{1, 1};
  Budget beta{1, 1};

  bool is_source() const { return preds.empty(); }
};

inline std::string subtask_id(int task, int instance, int node) {
  return "t" + std::to_string(task) + "_k" + std::to_string(instance) + "_v" + std::to_string(node);
}

/// Every subtask instance of one hyper-period, ordered by task, instance
/// and node. Release, deadline and budget are left for base allocation.
inline std::vector<SubtaskInstance> expand_jobs(const Taskset& ts, const AnchorSet& a, const ModelTable& models) {
  std::vector<SubtaskInstance> jobs;
  for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
    const auto& task = ts.tasks[i];
    const auto preds = task.predecessors();
    const auto succs = task.successors();
    std::vector<int> wl;
    for (const auto& w : task.workloads) {
      wl.push_back(models.workload_index(w));
      models.require_complete(wl.back());
    }
    for (std::size_t k = 0; k < a.per_task[i].size(); ++k) {
      const int offset = static_cast<int>(jobs.size());
      for (int v = 0; v < task.size(); ++v) {
        SubtaskInstance s;
        s.task = static_cast<int>(i);
        s.instance = static_cast<int>(k) + 1;
        s.node = v;
        s.id = subtask_id(s.task, s.instance, v);
        s.workload = wl[static_cast<std::size_t>(v)];
        s.max_ins = static_cast<double>(models.model(s.workload, {1, 1}).max_ins());
        for (int p : preds[static_cast<std::size_t>(v)]) s.preds.push_back(offset + p);
        for (int q : succs[static_cast<std::size_t>(v)]) s.succs.push_back(offset + q);
        s.anchor = a.per_task[i][k];
        s.abs_deadline = s.anchor + task.deadline;
        jobs.push_back(std::move(s));
      }
    }
  }
  return jobs;
}

}  // namespace cordkit::cord
