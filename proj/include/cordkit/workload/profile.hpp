#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cordkit/core/budget.hpp"

namespace cordkit {

inline constexpr int kDefaultIntervalMs = 10;

/// Counter deltas accumulated over one sampling interval starting at t_ms.
struct ResourceSample {
  std::int64_t t_ms = 0;
  std::int64_t instr = 0;
  std::int64_t cache_req = 0;
  std::int64_t cache_miss = 0;

  bool operator==(const ResourceSample&) const = default;
};

/// One measured (or generated) run of a workload under a fixed budget.
struct ResourceProfile {
  Budget budget;
  std::string run_id;
  int interval_ms = kDefaultIntervalMs;
  std::vector<ResourceSample> samples;

  bool operator==(const ResourceProfile&) const = default;

  std::int64_t total_instructions() const {
    std::int64_t sum = 0;
    for (const auto& s : samples) sum += s.instr;
    return sum;
  }

  /// Prefix sums of retired instructions; entry k is the count before sample k.
  std::vector<std::int64_t> cumulative_before() const {
    std::vector<std::int64_t> out(samples.size() + 1, 0);
    for (std::size_t k = 0; k < samples.size(); ++k) out[k + 1] = out[k] + samples[k].instr;
    return out;
  }

  double interval_seconds() const { return interval_ms / 1000.0; }

  /// Throws std::invalid_argument describing the first broken invariant.
  void validate() const {
    if (interval_ms <= 0) throw std::invalid_argument("profile " + run_id + ": interval must be positive");
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const auto& s = samples[k];
      if (s.instr < 0 || s.cache_req < 0 || s.cache_miss < 0)
        throw std::invalid_argument("profile " + run_id + ": negative counter");
      if (s.cache_miss > s.cache_req)
        throw std::invalid_argument("profile " + run_id + ": cache_miss exceeds cache_req");
      if (k > 0 && s.t_ms != samples[k - 1].t_ms + interval_ms)
        throw std::invalid_argument("profile " + run_id + ": sample times not spaced by interval");
    }
  }
};

/// All profiles of one workload together with the budget grid they live on.
struct ProfileSet {
  std::string workload;
  Budget grid_max{20, 20};
  std::vector<ResourceProfile> profiles;

  bool operator==(const ProfileSet&) const = default;

  /// Full budget grid B.
  std::vector<Budget> budget_grid() const { return full_budget_grid(grid_max); }

  /// Budgets that actually carry data (B'), ascending.
  std::vector<Budget> sampled_budgets() const {
    std::set<Budget> seen;
    for (const auto& p : profiles) seen.insert(p.budget);
    return {seen.begin(), seen.end()};
  }

  std::map<Budget, std::vector<const ResourceProfile*>> by_budget() const {
    std::map<Budget, std::vector<const ResourceProfile*>> out;
    for (const auto& p : profiles) out[p.budget].push_back(&p);
    return out;
  }
};

}  // namespace cordkit
