#pragma once

#include <algorithm>
#include <fstream>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cordkit/core/budget.hpp"
#include "cordkit/core/time.hpp"

namespace cordkit {

/// One parallel DAG task: nodes are bound to workload names, edges run
/// from predecessor to successor. The deadline is implicit (D = P).
struct DagTask {
  std::vector<std::string> workloads;  // per node
  std::vector<int> layers;             // per node, for generated tasks
  std::vector<std::pair<int, int>> edges;
  Tick period = 0;
  Tick deadline = 0;
  double target_utilization = 0.0;  // before period rounding
  double utilization = 0.0;         // after rounding
  std::vector<Tick> reference_wcets;

  int size() const { return static_cast<int>(workloads.size()); }

  std::vector<std::vector<int>> predecessors() const {
    std::vector<std::vector<int>> out(workloads.size());
    for (const auto& [a, b] : edges) out[static_cast<std::size_t>(b)].push_back(a);
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
  }
  std::vector<std::vector<int>> successors() const {
    std::vector<std::vector<int>> out(workloads.size());
    for (const auto& [a, b] : edges) out[static_cast<std::size_t>(a)].push_back(b);
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
  }

  /// Kahn order with ties broken by node index; throws on a cycle.
  std::vector<int> topological_order() const {
    const auto succ = successors();
    std::vector<int> indeg(workloads.size(), 0);
    for (const auto& e : edges) ++indeg[static_cast<std::size_t>(e.second)];
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int v = 0; v < size(); ++v)
      if (indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
    std::vector<int> order;
    while (!ready.empty()) {
      const int v = ready.top();
      ready.pop();
      order.push_back(v);
      for (int s : succ[static_cast<std::size_t>(v)])
        if (--indeg[static_cast<std::size_t>(s)] == 0) ready.push(s);
    }
    if (order.size() != workloads.size()) throw std::invalid_argument("task graph has a cycle");
    return order;
  }

  void validate() const {
    if (workloads.empty()) throw std::invalid_argument("task has no nodes");
    if (period <= 0 || deadline <= 0) throw std::invalid_argument("period and deadline must be positive");
    for (const auto& [a, b] : edges)
      if (a < 0 || b < 0 || a >= size() || b >= size() || a == b) throw std::invalid_argument("bad edge");
    topological_order();
  }
};

struct Taskset {
  std::vector<DagTask> tasks;
  Budget reference_budget{5, 5};
  double target_utilization = 0.0;

  double utilization() const {
    double u = 0.0;
    for (const auto& t : tasks) u += t.utilization;
    return u;
  }
};

/// Hyper-period and the release offsets (k-1)P of every task instance.
struct AnchorSet {
  Tick hyperperiod = 0;
  std::vector<std::vector<Tick>> per_task;
};

inline AnchorSet anchors(const Taskset& ts) {
  AnchorSet a;
  if (ts.tasks.empty()) return a;
  a.hyperperiod = 1;
  for (const auto& t : ts.tasks) {
    if (t.period <= 0) throw std::invalid_argument("period must be positive");
    a.hyperperiod = std::lcm(a.hyperperiod, t.period);
  }
  for (const auto& t : ts.tasks) {
    std::vector<Tick> v;
    for (Tick x = 0; x < a.hyperperiod; x += t.period) v.push_back(x);
    a.per_task.push_back(std::move(v));
  }
  return a;
}

// Taskset file (JSON):
//   {"reference_budget": [5, 5], "target_utilization": 2.0,
//    "tasks": [{"period_us": 4000000, "deadline_us": 4000000,
//               "target_utilization": 0.41, "utilization": 0.38,
//               "nodes": [{"workload": "stream", "layer": 0, "ref_wcet_us": 120000}, ...],
//               "edges": [[0, 1], ...]}]}
inline nlohmann::json taskset_to_json(const Taskset& ts) {
  nlohmann::json j;
  j["reference_budget"] = {ts.reference_budget.cache, ts.reference_budget.bw};
  j["target_utilization"] = ts.target_utilization;
  j["tasks"] = nlohmann::json::array();
  for (const auto& t : ts.tasks) {
    nlohmann::json jt;
    jt["period_us"] = t.period;
    jt["deadline_us"] = t.deadline;
    jt["target_utilization"] = t.target_utilization;
    jt["utilization"] = t.utilization;
    jt["nodes"] = nlohmann::json::array();
    for (int v = 0; v < t.size(); ++v) {
      nlohmann::json n{{"workload", t.workloads[static_cast<std::size_t>(v)]}};
      if (!t.layers.empty()) n["layer"] = t.layers[static_cast<std::size_t>(v)];
      if (!t.reference_wcets.empty()) n["ref_wcet_us"] = t.reference_wcets[static_cast<std::size_t>(v)];
      jt["nodes"].push_back(n);
    }
    jt["edges"] = nlohmann::json::array();
    for (const auto& [a, b] : t.edges) jt["edges"].push_back({a, b});
    j["tasks"].push_back(jt);
  }
  return j;
}

inline Taskset taskset_from_json(const nlohmann::json& j) {
  Taskset ts;
  if (j.contains("reference_budget")) {
    const auto& rb = j.at("reference_budget");
    ts.reference_budget = {rb.at(0).get<int>(), rb.at(1).get<int>()};
  }
  ts.target_utilization = j.value("target_utilization", 0.0);
  for (const auto& jt : j.at("tasks")) {
    DagTask t;
    t.period = jt.at("period_us").get<Tick>();
    t.deadline = jt.value("deadline_us", t.period);
    t.target_utilization = jt.value("target_utilization", 0.0);
    t.utilization = jt.value("utilization", 0.0);
    for (const auto& n : jt.at("nodes")) {
      t.workloads.push_back(n.at("workload").get<std::string>());
      if (n.contains("layer")) t.layers.push_back(n.at("layer").get<int>());
      if (n.contains("ref_wcet_us")) t.reference_wcets.push_back(n.at("ref_wcet_us").get<Tick>());
    }
    if (!t.layers.empty() && t.layers.size() != t.workloads.size()) throw std::invalid_argument("layer list incomplete");
    if (!t.reference_wcets.empty() && t.reference_wcets.size() != t.workloads.size())
      throw std::invalid_argument("reference WCET list incomplete");
    for (const auto& e : jt.at("edges")) t.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    t.validate();
    ts.tasks.push_back(std::move(t));
  }
  return ts;
}

inline void write_taskset(const Taskset& ts, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << taskset_to_json(ts).dump(2) << '\n';
}

inline Taskset read_taskset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return taskset_from_json(nlohmann::json::parse(is));
}

}  // namespace cordkit
