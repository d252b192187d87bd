#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cordkit/core/rng.hpp"
#include "cordkit/phase/bank.hpp"
#include "cordkit/taskgen/taskset.hpp"

namespace cordkit {

namespace detail {

/// Uniform point on the simplex {x >= 0, sum x = total}.
inline void uunifast(std::vector<double>& u, double total, Rng& rng) {
  const int n = static_cast<int>(u.size());
  double sum = total;
  for (int i = 0; i < n - 1; ++i) {
    const double next = sum * std::pow(uniform01(rng), 1.0 / (n - 1 - i));
    u[static_cast<std::size_t>(i)] = sum - next;
    sum = next;
  }
  u.back() = sum;
}

}  // namespace detail

/// n utilizations summing to total, uniform over the simplex; whole
/// vectors are redrawn until every component is at most 1.
///
/// Near full load almost every draw is discarded. For total >= n - 1 the
/// complement 1 - u lives on a simplex of size n - total whose points all
/// satisfy the cap, so it is drawn directly; the result has the same
/// distribution as the discard loop.
inline std::vector<double> uunifast_discard(int n, double total, Rng& rng) {
  if (n < 1) throw std::invalid_argument("need at least one task");
  if (total < 0.0) throw std::invalid_argument("utilization must be non-negative");
  if (total > n) throw std::invalid_argument("utilization exceeds task count");
  std::vector<double> u(static_cast<std::size_t>(n));
  if (n > 1 && total >= n - 1) {
    detail::uunifast(u, n - total, rng);
    for (double& x : u) x = 1.0 - x;
    return u;
  }
  for (;;) {
    detail::uunifast(u, total, rng);
    bool ok = true;
    for (double x : u) ok = ok && x <= 1.0;
    if (ok) return u;
  }
}

/// Nearest power of two on a linear scale; ties go to the smaller one.
/// The exponent is clamped to [min_exp, max_exp].
inline double round_to_power_of_two(double seconds, int min_exp = -6, int max_exp = 12) {
  if (!(seconds > 0.0)) throw std::invalid_argument("period must be positive");
  if (std::isinf(seconds)) return std::ldexp(1.0, max_exp);
  int k = static_cast<int>(std::floor(std::log2(seconds)));
  const double lo = std::ldexp(1.0, k);
  if (seconds - lo > 2.0 * lo - seconds) ++k;
  k = std::clamp(k, min_exp, max_exp);
  return std::ldexp(1.0, k);
}

struct TasksetConfig {
  int tasks = 5;
  double edge_probability = 0.5;
  int min_depth = 3;
  int max_depth = 8;
  int max_width = 4;
  double utilization = 1.0;
  std::uint64_t seed = 1;
  Budget reference_budget{5, 5};
  int min_period_exp = -6;
  int max_period_exp = 12;

  void validate() const {
    if (tasks < 1) throw std::invalid_argument("need at least one task");
    if (edge_probability < 0.0 || edge_probability > 1.0) throw std::invalid_argument("edge probability outside [0,1]");
    if (min_depth < 1 || max_depth < min_depth) throw std::invalid_argument("bad depth range");
    if (max_width < 1) throw std::invalid_argument("bad width cap");
  }
};

/// Layered random DAG: each node may link to every node of the next layer
/// with probability p. Nodes left without any edge are tied to a random
/// node of an adjacent layer.
inline DagTask random_dag(const TasksetConfig& cfg, const std::vector<std::string>& workloads, Rng& rng) {
  DagTask t;
  const int depth = uniform_int(rng, cfg.min_depth, cfg.max_depth);
  std::vector<std::vector<int>> layer_nodes(static_cast<std::size_t>(depth));
  for (int l = 0; l < depth; ++l) {
    const int width = uniform_int(rng, 1, cfg.max_width);
    for (int i = 0; i < width; ++i) {
      layer_nodes[static_cast<std::size_t>(l)].push_back(t.size());
      t.layers.push_back(l);
      t.workloads.push_back(workloads[static_cast<std::size_t>(
          uniform_int(rng, 0, static_cast<int>(workloads.size()) - 1))]);
    }
  }
  for (int l = 0; l + 1 < depth; ++l)
    for (int a : layer_nodes[static_cast<std::size_t>(l)])
      for (int b : layer_nodes[static_cast<std::size_t>(l + 1)])
        if (uniform01(rng) < cfg.edge_probability) t.edges.emplace_back(a, b);
  std::vector<int> degree(static_cast<std::size_t>(t.size()), 0);
  for (const auto& [a, b] : t.edges) ++degree[static_cast<std::size_t>(a)], ++degree[static_cast<std::size_t>(b)];
  for (int v = 0; v < t.size() && depth > 1; ++v) {
    if (degree[static_cast<std::size_t>(v)] > 0) continue;
    const int l = t.layers[static_cast<std::size_t>(v)];
    const int other = l + 1 < depth ? l + 1 : l - 1;
    const auto& cand = layer_nodes[static_cast<std::size_t>(other)];
    const int u = cand[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(cand.size()) - 1))];
    if (other > l)
      t.edges.emplace_back(v, u);
    else
      t.edges.emplace_back(u, v);
    ++degree[static_cast<std::size_t>(v)];
    ++degree[static_cast<std::size_t>(u)];
  }
  std::sort(t.edges.begin(), t.edges.end());
  return t;
}

/// Random taskset. The period of each task is its summed reference WCET
/// over its share of the utilization, rounded to a power of two.
inline Taskset gen_taskset(const TasksetConfig& cfg, const phase::ModelBank& bank) {
  cfg.validate();
  Taskset ts;
  ts.reference_budget = cfg.reference_budget;
  ts.target_utilization = cfg.utilization;
  if (cfg.utilization <= 0.0) return ts;
  const auto names = bank.workloads();
  if (names.empty()) throw std::invalid_argument("model bank is empty");
  Rng rng(cfg.seed);
  const auto utils = uunifast_discard(cfg.tasks, cfg.utilization, rng);
  for (double u : utils) {
    DagTask t = random_dag(cfg, names, rng);
    Tick sum = 0;
    for (const auto& w : t.workloads) {
      t.reference_wcets.push_back(bank.wcet(w, cfg.reference_budget));
      sum += t.reference_wcets.back();
    }
    const double raw = u > 0.0 ? ticks_to_seconds(sum) / u : HUGE_VAL;
    t.period = seconds_to_ticks_round(round_to_power_of_two(raw, cfg.min_period_exp, cfg.max_period_exp));
    t.deadline = t.period;
    t.target_utilization = u;
    t.utilization = static_cast<double>(sum) / static_cast<double>(t.period);
    ts.tasks.push_back(std::move(t));
  }
  return ts;
}

}  // namespace cordkit
