#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cordkit/core/budget.hpp"
#include "cordkit/phase/select_k.hpp"
#include "cordkit/workload/profile.hpp"

namespace cordkit::phase {

/// Expected rate gain (instructions per second) for one more partition of
/// each resource type; empty when no larger budget is admissible.
using DeltaRow = std::array<std::optional<double>, kResourceTypes>;

struct Phase {
  std::int64_t start = 0;  // cumulative instructions, inclusive
  std::int64_t end = 0;    // exclusive
  double rate = 0.0;       // worst-case instructions per second
  int cluster = 0;
  DeltaRow delta;   // lookahead mean
  DeltaRow direct;  // one-step change, diagnostics only

  std::int64_t span() const { return end - start; }
  bool operator==(const Phase&) const = default;
};

class PhaseModel {
 public:
  std::string workload;
  Budget budget;
  std::vector<Phase> phases;
  bool rate_floored = false;  // some phase needed the minimum-rate floor

  std::int64_t max_ins() const { return phases.empty() ? 0 : phases.back().end; }

  /// Phase with start <= ins < end.
  const Phase& lookup(double ins) const {
    if (phases.empty()) throw std::out_of_range("empty phase model");
    if (ins < 0.0 || ins >= static_cast<double>(max_ins()))
      throw std::out_of_range("instruction count outside [0, maxIns)");
    auto it = std::upper_bound(phases.begin(), phases.end(), ins,
                               [](double v, const Phase& p) { return v < static_cast<double>(p.end); });
    return *it;
  }
  std::size_t phase_index(double ins) const { return static_cast<std::size_t>(&lookup(ins) - phases.data()); }
  double rate_at(double ins) const { return lookup(ins).rate; }

  /// Worst-case execution time in seconds.
  double wcet_seconds() const {
    double t = 0.0;
    for (const auto& p : phases) t += static_cast<double>(p.span()) / p.rate;
    return t;
  }

  /// Seconds to retire instructions [from, max_ins()) at the modelled rates.
  double remaining_seconds(double from) const {
    double t = 0.0;
    for (const auto& p : phases) {
      const double lo = std::max(from, static_cast<double>(p.start));
      if (lo < static_cast<double>(p.end)) t += (static_cast<double>(p.end) - lo) / p.rate;
    }
    return t;
  }

  void validate() const {
    if (phases.empty()) throw std::invalid_argument("phase model has no phases");
    if (phases.front().start != 0) throw std::invalid_argument("first phase must start at 0");
    for (std::size_t j = 0; j < phases.size(); ++j) {
      if (phases[j].start >= phases[j].end) throw std::invalid_argument("phase with empty span");
      if (!(phases[j].rate > 0.0)) throw std::invalid_argument("phase rate must be positive");
      if (j > 0 && phases[j].start != phases[j - 1].end) throw std::invalid_argument("phases are not contiguous");
    }
  }

  /// Moves the end of the last phase so the model retires `total`
  /// instructions; phases wholly past `total` are dropped.
  void set_max_ins(std::int64_t total) {
    if (total <= 0) throw std::invalid_argument("total instructions must be positive");
    while (phases.size() > 1 && phases.back().start >= total) phases.pop_back();
    if (phases.empty()) throw std::invalid_argument("no phases to stretch");
    phases.back().end = total;
  }

  bool operator==(const PhaseModel&) const = default;
};

/// Profile with trailing zero-instruction samples (finished workload) removed.
inline ResourceProfile trim_finished(const ResourceProfile& p) {
  ResourceProfile out = p;
  while (!out.samples.empty() && out.samples.back().instr == 0) out.samples.pop_back();
  return out;
}

inline Matrix feature_matrix(const std::vector<const ResourceProfile*>& runs) {
  std::size_t n = 0;
  for (const auto* r : runs) n += r->samples.size();
  Matrix x(static_cast<Eigen::Index>(n), 3);
  Eigen::Index row = 0;
  for (const auto* r : runs)
    for (const auto& s : r->samples) {
      x(row, 0) = static_cast<double>(s.instr);
      x(row, 1) = static_cast<double>(s.cache_req);
      x(row, 2) = static_cast<double>(s.cache_miss);
      ++row;
    }
  return x;
}

namespace detail {

// Minimum per-second rate per cluster over the given runs; zero-rate
// clusters get one instruction per interval.
inline std::map<int, double> cluster_rates(const std::vector<const ResourceProfile*>& runs,
                                           const std::vector<std::vector<int>>& labels, std::set<int>& floored) {
  std::map<int, double> rate;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const double per_sec = 1.0 / runs[r]->interval_seconds();
    for (std::size_t i = 0; i < runs[r]->samples.size(); ++i) {
      const double v = static_cast<double>(runs[r]->samples[i].instr) * per_sec;
      auto [it, fresh] = rate.emplace(labels[r][i], v);
      if (!fresh) it->second = std::min(it->second, v);
    }
  }
  for (auto& [c, v] : rate)
    if (v <= 0.0) {
      v = 1.0 / runs.front()->interval_seconds();
      floored.insert(c);
    }
  return rate;
}

inline PhaseModel compress(const ResourceProfile& run, const std::vector<int>& labels,
                           const std::map<int, double>& rates, const std::set<int>& floored) {
  PhaseModel m;
  m.budget = run.budget;
  std::int64_t cum = 0;
  for (std::size_t i = 0; i < run.samples.size(); ++i) {
    const auto instr = run.samples[i].instr;
    if (instr > 0) {
      if (!m.phases.empty() && m.phases.back().cluster == labels[i] && m.phases.back().end == cum) {
        m.phases.back().end += instr;
      } else {
        m.phases.push_back({cum, cum + instr, rates.at(labels[i]), labels[i], {}, {}});
      }
    }
    cum += instr;
  }
  for (const auto& p : m.phases)
    if (floored.count(p.cluster)) m.rate_floored = true;
  return m;
}

}  // namespace detail

/// Run-length compression of one labelled profile. Each phase gets the
/// minimum rate of its cluster anywhere in the profile.
inline PhaseModel extract_phases(const ResourceProfile& profile, const std::vector<int>& labels) {
  if (labels.size() != profile.samples.size()) throw std::invalid_argument("one label per sample required");
  if (profile.total_instructions() <= 0) throw std::invalid_argument("profile retires no instructions");
  std::set<int> floored;
  const auto rates = detail::cluster_rates({&profile}, {labels}, floored);
  return detail::compress(profile, labels, rates, floored);
}

struct ExtractOptions {
  SelectKOptions select;
  std::uint64_t seed = 1;
};

/// Clusters all runs of one (workload, budget) together. Boundaries come
/// from the first run; each cluster's rate is its minimum over every run.
inline PhaseModel phase_model_from_runs(const std::vector<const ResourceProfile*>& runs, const std::string& workload,
                                        const ExtractOptions& opt = {}) {
  if (runs.empty()) throw std::invalid_argument("no runs");
  std::vector<ResourceProfile> trimmed;
  for (const auto* r : runs) trimmed.push_back(trim_finished(*r));
  std::vector<const ResourceProfile*> ptrs;
  for (const auto& t : trimmed) {
    if (t.samples.empty()) throw std::invalid_argument("run retires no instructions");
    ptrs.push_back(&t);
  }
  const Matrix x = feature_matrix(ptrs);
  auto sel = opt.select;
  sel.k_min = std::min<int>(sel.k_min, static_cast<int>(x.rows()));
  const auto res = select_k(x, opt.seed, sel);
  std::vector<std::vector<int>> labels;
  std::size_t pos = 0;
  for (const auto* r : ptrs) {
    labels.emplace_back(res.labels.begin() + static_cast<std::ptrdiff_t>(pos),
                        res.labels.begin() + static_cast<std::ptrdiff_t>(pos + r->samples.size()));
    pos += r->samples.size();
  }
  std::set<int> floored;
  const auto rates = detail::cluster_rates(ptrs, labels, floored);
  auto m = detail::compress(*ptrs.front(), labels.front(), rates, floored);
  m.workload = workload;
  return m;
}

}  // namespace cordkit::phase
