#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cordkit/core/budget.hpp"
#include "cordkit/core/rng.hpp"
#include "cordkit/workload/profile.hpp"

namespace cordkit {

/// Input description of one execution phase of a synthetic workload.
/// Rates are instructions per sampling interval.
struct PhaseDescriptor {
  std::int64_t instructions = 0;
  double base_rate = 0.0;
  double cache_coef = 0.0;
  double bw_coef = 0.0;
  double req_ratio = 0.3;   // cache requests per retired instruction
  double miss_ratio = 0.1;  // misses per cache request
};

struct GroundTruthSpec {
  std::string name = "workload";
  std::vector<PhaseDescriptor> phases;
  double noise_level = 0.0;
  int interval_ms = kDefaultIntervalMs;
};

struct TruePhase {
  std::int64_t start = 0;
  std::int64_t end = 0;
  PhaseDescriptor desc;
};

/// Synthetic workload with a known rate function; stands in for hardware
/// measurement and doubles as the test oracle.
///
/// rate(i, b) = base + cache_coef * (b.cache - 1) + bw_coef * (b.bw - 1)
/// for the phase containing cumulative instruction i.
class GroundTruthWorkload {
 public:
  GroundTruthWorkload() = default;
  GroundTruthWorkload(std::string name, std::vector<TruePhase> phases, double noise, int interval_ms)
      : name_(std::move(name)), phases_(std::move(phases)), noise_(noise), interval_ms_(interval_ms) {}

  const std::string& name() const { return name_; }
  const std::vector<TruePhase>& phases() const { return phases_; }
  double noise_level() const { return noise_; }
  int interval_ms() const { return interval_ms_; }
  std::int64_t total_instructions() const { return phases_.empty() ? 0 : phases_.back().end; }

  std::size_t phase_index(std::int64_t instr) const {
    auto it = std::upper_bound(phases_.begin(), phases_.end(), instr,
                               [](std::int64_t v, const TruePhase& p) { return v < p.end; });
    if (it == phases_.end()) return phases_.size() - 1;
    return static_cast<std::size_t>(it - phases_.begin());
  }

  /// Expected instructions per interval at cumulative position instr.
  double rate(std::int64_t instr, const Budget& b) const {
    const auto& d = phases_[phase_index(instr)].desc;
    return d.base_rate + d.cache_coef * (b.cache - 1) + d.bw_coef * (b.bw - 1);
  }

  /// Rate in instructions per second.
  double rate_per_second(std::int64_t instr, const Budget& b) const { return rate(instr, b) * 1000.0 / interval_ms_; }

  /// Lowest rate the noise model can produce (noise is truncated at 3 sigma).
  double worst_case_rate_per_second(std::int64_t instr, const Budget& b) const {
    return rate_per_second(instr, b) * (1.0 - 3.0 * noise_);
  }

  /// Exact execution time in seconds when every interval runs at the expected rate.
  double execution_time(const Budget& b) const {
    double t = 0;
    for (const auto& p : phases_) t += static_cast<double>(p.end - p.start) / rate_per_second(p.start, b);
    return t;
  }

 private:
  std::string name_;
  std::vector<TruePhase> phases_;
  double noise_ = 0.0;
  int interval_ms_ = kDefaultIntervalMs;
};

inline GroundTruthWorkload make_ground_truth(const GroundTruthSpec& spec) {
  if (spec.phases.empty()) throw std::invalid_argument("ground truth needs at least one phase");
  if (spec.noise_level < 0.0 || spec.noise_level >= 1.0 / 3.0)
    throw std::invalid_argument("noise level must lie in [0, 1/3)");
  if (spec.interval_ms <= 0) throw std::invalid_argument("interval must be positive");
  std::vector<TruePhase> phases;
  std::int64_t pos = 0;
  for (const auto& d : spec.phases) {
    if (!(d.base_rate > 0.0)) throw std::invalid_argument("phase base rate must be positive");
    if (d.instructions <= 0) throw std::invalid_argument("phase instruction count must be positive");
    if (d.cache_coef < 0.0 || d.bw_coef < 0.0)
      throw std::invalid_argument("sensitivity coefficients must be non-negative");
    if (d.req_ratio < 0.0 || d.miss_ratio < 0.0 || d.miss_ratio > 1.0)
      throw std::invalid_argument("cache ratios out of range");
    phases.push_back({pos, pos + d.instructions, d});
    pos += d.instructions;
  }
  return GroundTruthWorkload(spec.name, std::move(phases), spec.noise_level, spec.interval_ms);
}

/// Samples one run. Each interval runs entirely at the rate of the phase that
/// contains the cumulative count at the interval start; noise is
/// multiplicative N(0, noise^2) truncated at +-3 sigma. Sampling stops once
/// the cumulative count reaches the workload total.
inline ResourceProfile sample_profile(const GroundTruthWorkload& w, const Budget& beta, std::uint64_t seed,
                                      std::string run_id = "run") {
  ResourceProfile prof;
  prof.budget = beta;
  prof.run_id = std::move(run_id);
  prof.interval_ms = w.interval_ms();
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = w.noise_level();
  const std::int64_t total = w.total_instructions();
  std::int64_t cum = 0;
  std::int64_t t = 0;
  while (cum < total) {
    const auto& d = w.phases()[w.phase_index(cum)].desc;
    double factor = 1.0;
    if (sigma > 0.0) {
      double z;
      do z = normal(rng);
      while (std::abs(z) > 3.0);
      factor += sigma * z;
    }
    const double expected = d.base_rate + d.cache_coef * (beta.cache - 1) + d.bw_coef * (beta.bw - 1);
    ResourceSample s;
    s.t_ms = t;
    s.instr = std::max<std::int64_t>(1, std::llround(expected * factor));
    s.cache_req = std::llround(static_cast<double>(s.instr) * d.req_ratio);
    s.cache_miss = std::llround(static_cast<double>(s.cache_req) * d.miss_ratio);
    prof.samples.push_back(s);
    cum += s.instr;
    t += w.interval_ms();
  }
  return prof;
}

/// Samples runs_per_budget runs for every budget in budgets; run seeds are
/// derived from root_seed so any subset can be regenerated independently.
inline ProfileSet sample_profile_set(const GroundTruthWorkload& w, const std::vector<Budget>& budgets,
                                     int runs_per_budget, const Budget& grid_max, std::uint64_t root_seed) {
  ProfileSet set;
  set.workload = w.name();
  set.grid_max = grid_max;
  for (const auto& b : budgets) {
    if (b.cache < 1 || b.bw < 1 || exceeds(b, grid_max))
      throw std::invalid_argument("budget " + b.str() + " outside grid");
    for (int r = 0; r < runs_per_budget; ++r) {
      const auto seed = derive_seed(root_seed, {static_cast<std::uint64_t>(b.cache),
                                                static_cast<std::uint64_t>(b.bw), static_cast<std::uint64_t>(r)});
      set.profiles.push_back(sample_profile(w, b, seed, "r" + std::to_string(r)));
    }
  }
  return set;
}

}  // namespace cordkit
