#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cordkit/core/budget.hpp"
#include "cordkit/core/time.hpp"
#include "cordkit/phase/bank.hpp"

namespace cordkit::cord {

using phase::PhaseModel;

/// Instructions within this distance of maxIns count as finished; absorbs
/// the rounding of completion times up to whole ticks.
inline constexpr double kDoneTolerance = 0.5;

/// Dense lookup of phase models by workload index and budget, covering
/// every budget from (1,1) to the platform maximum.
class ModelTable {
 public:
  ModelTable(const phase::ModelBank& bank, const Budget& max) : max_(max) {
    for (const auto& w : bank.workloads()) {
      index_[w] = static_cast<int>(names_.size());
      names_.push_back(w);
      std::vector<const PhaseModel*> grid(static_cast<std::size_t>(max.cache * max.bw), nullptr);
      for (const auto& [b, m] : bank.models_of(w))
        if (b.cache >= 1 && b.bw >= 1 && fits_within(b, max)) grid[slot(b)] = &m;
      grids_.push_back(std::move(grid));
    }
  }

  int workload_index(const std::string& w) const {
    const auto it = index_.find(w);
    if (it == index_.end()) throw std::out_of_range("unknown workload '" + w + "'");
    return it->second;
  }
  const std::string& workload_name(int w) const { return names_.at(static_cast<std::size_t>(w)); }

  /// Throws when the workload lacks a model for some budget up to the maximum.
  void require_complete(int w) const {
    for (const auto* m : grids_.at(static_cast<std::size_t>(w)))
      if (!m) throw std::out_of_range("model bank incomplete for '" + workload_name(w) + "'");
  }

  const PhaseModel& model(int w, const Budget& b) const {
    if (b.cache < 1 || b.bw < 1 || exceeds(b, max_)) throw std::out_of_range("budget " + b.str() + " outside the grid");
    const auto* m = grids_[static_cast<std::size_t>(w)][slot(b)];
    if (!m) throw std::out_of_range("no model for '" + workload_name(w) + "' at " + b.str());
    return *m;
  }

  Tick wcet(int w, const Budget& b) const { return seconds_to_ticks_ceil(model(w, b).wcet_seconds()); }
  const Budget& max_budget() const { return max_; }

 private:
  std::size_t slot(const Budget& b) const { return static_cast<std::size_t>((b.cache - 1) * max_.bw + (b.bw - 1)); }

  Budget max_;
  std::map<std::string, int> index_;
  std::vector<std::string> names_;
  std::vector<std::vector<const PhaseModel*>> grids_;
};

/// Instruction count after running `seconds` from `ins` at the model's
/// phase rates, capped at maxIns.
inline double advance_ins(const PhaseModel& m, double ins, double seconds) {
  const double max = static_cast<double>(m.max_ins());
  if (ins >= max) return max;
  std::size_t j = m.phase_index(ins);
  double left = seconds;
  while (left > 0.0 && j < m.phases.size()) {
    const auto& p = m.phases[j];
    const double need = (static_cast<double>(p.end) - ins) / p.rate;
    if (need <= left) {
      ins = static_cast<double>(p.end);
      left -= need;
      ++j;
    } else {
      ins += p.rate * left;
      left = 0.0;
    }
  }
  return std::min(ins, max);
}

/// Seconds to go from instruction `from` to `to` under the model.
inline double span_seconds(const PhaseModel& m, double from, double to) {
  double t = 0.0;
  for (const auto& p : m.phases) {
    const double lo = std::max(from, static_cast<double>(p.start));
    const double hi = std::min(to, static_cast<double>(p.end));
    if (lo < hi) t += (hi - lo) / p.rate;
  }
  return t;
}

/// Instructions retired over [t, t_next) when running under `m`.
inline double compute_ins(const PhaseModel& m, double ins, Tick t, Tick t_next) {
  if (t_next < t) throw std::invalid_argument("segment ends before it starts");
  if (t_next >= kTickInfinity) return static_cast<double>(m.max_ins());
  return advance_ins(m, ins, ticks_to_seconds(t_next - t));
}

/// Estimated completion when running under `boosted` until t_next and
/// under `base` afterwards. Rounded up to a whole tick, at least t + 1.
inline Tick get_finish_time(const PhaseModel& boosted, const PhaseModel& base, double ins, Tick t, Tick t_next) {
  const double max = static_cast<double>(boosted.max_ins());
  if (ins >= max) throw std::logic_error("finish time requested for a finished subtask");
  const double at_next = compute_ins(boosted, ins, t, t_next);
  const double secs = span_seconds(boosted, ins, at_next) + span_seconds(base, at_next, max);
  return t + std::max<Tick>(1, seconds_to_ticks_ceil(secs));
}

}  // namespace cordkit::cord
