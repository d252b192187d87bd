#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "cordkit/msb/marginal.hpp"
#include "cordkit/workload/profile.hpp"

namespace cordkit::genprof {

/// Columns of an augmented state: resource state, then the budget.
inline constexpr int kStateDims = 3;
inline constexpr int kAugmentedDims = kStateDims + kResourceTypes;

inline constexpr double kDefaultSnapshotSpacing = 0.05;

/// Time of the last sample over all profiles, in seconds.
inline double profile_horizon(const ProfileSet& set) {
  double h = 0.0;
  for (const auto& p : set.profiles)
    if (!p.samples.empty()) h = std::max(h, static_cast<double>(p.samples.back().t_ms) / 1000.0);
  return h;
}

/// 0, spacing, 2*spacing, ... until the horizon is covered.
inline std::vector<double> snapshot_grid(double horizon, double spacing = kDefaultSnapshotSpacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("snapshot spacing must be positive");
  const auto steps = static_cast<long>(std::ceil(horizon / spacing - 1e-9));
  std::vector<double> out;
  for (long k = 0; k <= std::max(1L, steps); ++k) out.push_back(static_cast<double>(k) * spacing);
  return out;
}

/// Resource state of a profile at time t (seconds). Past the end of the run
/// the workload has finished, so the state is zero.
inline std::array<double, kStateDims> state_at(const ResourceProfile& p, double t) {
  const auto k = std::llround(t * 1000.0 / p.interval_ms);
  if (k < 0 || k >= static_cast<long long>(p.samples.size())) return {0.0, 0.0, 0.0};
  const auto& s = p.samples[static_cast<std::size_t>(k)];
  return {static_cast<double>(s.instr), static_cast<double>(s.cache_req), static_cast<double>(s.cache_miss)};
}

/// One equally weighted point per profile per snapshot time; a point is the
/// resource state at that time followed by the profile's budget. When
/// `budgets` is given, only those budgets are used and each must have
/// profiles.
inline std::vector<msb::Marginal> build_marginals(const ProfileSet& set, const std::vector<double>& times,
                                                  const std::optional<std::vector<Budget>>& budgets = std::nullopt) {
  if (set.profiles.empty()) throw std::invalid_argument("profile set is empty");
  if (times.empty()) throw std::invalid_argument("no snapshot times");
  std::vector<const ResourceProfile*> used;
  if (budgets) {
    const auto groups = set.by_budget();
    for (const auto& b : *budgets) {
      const auto it = groups.find(b);
      if (it == groups.end()) throw std::invalid_argument("no profiles for budget " + b.str());
      used.insert(used.end(), it->second.begin(), it->second.end());
    }
  } else {
    for (const auto& p : set.profiles) used.push_back(&p);
  }
  const auto n = static_cast<Eigen::Index>(used.size());
  std::vector<msb::Marginal> out;
  for (double t : times) {
    msb::Marginal m;
    m.time = t;
    m.points.resize(n, kAugmentedDims);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& p = *used[static_cast<std::size_t>(i)];
      const auto xi = state_at(p, t);
      for (int d = 0; d < kStateDims; ++d) m.points(i, d) = xi[static_cast<std::size_t>(d)];
      m.points(i, kStateDims) = p.budget.cache;
      m.points(i, kStateDims + 1) = p.budget.bw;
    }
    m.weights = msb::Vector::Constant(n, 1.0 / static_cast<double>(n));
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace cordkit::genprof
