#pragma once

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cordkit/core/csv.hpp"
#include "cordkit/genprof/marginals.hpp"
#include "cordkit/msb/interpolate.hpp"
#include "cordkit/msb/sinkhorn.hpp"

namespace cordkit::genprof {

/// Distribution of the resource state at time t given budget; budget
/// columns removed, coincident points merged (lexicographic order).
struct ConditionalDistribution {
  double time = 0.0;
  Budget budget;
  msb::Matrix points;  // rows are (instr, cache_req, cache_miss)
  msb::Vector weights;
};

enum class ProfileMode { MaxLikelihood, Mean };

inline std::string mode_name(ProfileMode m) { return m == ProfileMode::Mean ? "mean" : "ml"; }

struct SyntheticProfile {
  ProfileMode mode = ProfileMode::MaxLikelihood;
  ResourceProfile profile;
};

struct ConditionOptions {
  double bandwidth = 1.0;  // partitions
  double prune = 0.0;      // bimarginal entries at or below this are skipped;
                           // conditional weights below it are dropped
};

inline constexpr double kMinConditionalMass = 1e-12;

/// Conditions the bridge on a budget. Holds the nonzero bimarginal entries
/// of every snapshot interval so repeated queries skip the dense scan.
class BudgetConditioner {
 public:
  BudgetConditioner(const msb::MsbSolution& sol, const std::vector<msb::Marginal>& marginals,
                    ConditionOptions opt = {})
      : marginals_(marginals), opt_(opt) {
    if (!(opt_.bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    if (marginals.size() < 2) throw std::invalid_argument("need at least two marginals");
    if (marginals.front().dim() != kAugmentedDims) throw std::invalid_argument("marginals are not augmented states");
    for (std::size_t s = 0; s + 1 < marginals.size(); ++s) {
      const auto& m = sol.bimarginal(s);
      std::vector<Entry> entries;
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
          if (m(i, j) > opt_.prune) entries.push_back({i, j, m(i, j)});
      pairs_.push_back(std::move(entries));
    }
  }

  double start_time() const { return marginals_.front().time; }
  double end_time() const { return marginals_.back().time; }

  ConditionalDistribution at(double t, const Budget& beta) const {
    const auto [s, lambda] = msb::locate_time(marginals_, t);
    const auto& a = marginals_[s].points;
    const auto& b = marginals_[s + 1].points;
    const auto& entries = pairs_[s];
    const double inv2h2 = 1.0 / (2.0 * opt_.bandwidth * opt_.bandwidth);
    msb::ScatteredDistribution raw;
    raw.points.resize(static_cast<Eigen::Index>(entries.size()), kStateDims);
    raw.weights.resize(static_cast<Eigen::Index>(entries.size()));
    double total = 0.0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto [i, j, mass] = entries[k];
      const auto r = static_cast<Eigen::Index>(k);
      double d2 = 0.0;
      for (int c = 0; c < kResourceTypes; ++c) {
        const auto col = kStateDims + c;
        const double coord = msb::blend(a(i, col), b(j, col), lambda);
        const double diff = coord - beta[c];
        d2 += diff * diff;
      }
      const double w = mass * std::exp(-d2 * inv2h2);
      for (int c = 0; c < kStateDims; ++c)
        raw.points(r, c) = msb::blend(a(i, c), b(j, c), lambda);
      raw.weights(r) = w;
      total += w;
    }
    if (!(total >= kMinConditionalMass))
      throw std::domain_error("budget " + beta.str() + " has no support at t=" + csv::format_double(t) +
                              " (kernel mass " + csv::format_double(total) + ")");
    raw.weights /= total;
    if (opt_.prune > 0.0) {
      Eigen::Index kept = 0;
      for (Eigen::Index r = 0; r < raw.weights.size(); ++r) {
        if (raw.weights(r) <= opt_.prune) continue;
        if (kept != r) {
          raw.points.row(kept) = raw.points.row(r);
          raw.weights(kept) = raw.weights(r);
        }
        ++kept;
      }
      raw.points.conservativeResize(kept, Eigen::NoChange);
      raw.weights.conservativeResize(kept);
      raw.weights /= raw.weights.sum();
    }
    auto merged = raw.merged();
    return {t, beta, std::move(merged.points), std::move(merged.weights)};
  }

 private:
  struct Entry {
    Eigen::Index i, j;
    double mass;
  };
  const std::vector<msb::Marginal>& marginals_;
  ConditionOptions opt_;
  std::vector<std::vector<Entry>> pairs_;
};

inline ConditionalDistribution conditional_at(const msb::MsbSolution& sol, const std::vector<msb::Marginal>& marginals,
                                              double t, const Budget& beta, double bandwidth = 1.0) {
  return BudgetConditioner(sol, marginals, {.bandwidth = bandwidth}).at(t, beta);
}

/// Argmax-weight point (lowest index on ties) or the weighted mean.
inline std::array<double, kStateDims> summarize(const ConditionalDistribution& c, ProfileMode mode) {
  std::array<double, kStateDims> out{};
  if (mode == ProfileMode::MaxLikelihood) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 1; r < c.weights.size(); ++r)
      if (c.weights(r) > c.weights(best)) best = r;
    for (int d = 0; d < kStateDims; ++d) out[static_cast<std::size_t>(d)] = c.points(best, d);
  } else {
    const msb::Vector mean = c.points.transpose() * c.weights;
    for (int d = 0; d < kStateDims; ++d) out[static_cast<std::size_t>(d)] = mean(d);
  }
  return out;
}

/// Grid times in ms: 0, interval, ... up to the last snapshot.
inline std::vector<std::int64_t> output_grid_ms(const BudgetConditioner& cond, int interval_ms) {
  if (interval_ms <= 0) throw std::invalid_argument("interval must be positive");
  std::vector<std::int64_t> out;
  const auto end_ms = static_cast<std::int64_t>(std::floor(cond.end_time() * 1000.0 + 1e-6));
  const auto start_ms = static_cast<std::int64_t>(std::ceil(cond.start_time() * 1000.0 - 1e-6));
  for (std::int64_t t = start_ms; t <= end_ms; t += interval_ms) out.push_back(t);
  return out;
}

inline SyntheticProfile synthetic_profile(const BudgetConditioner& cond, const Budget& beta,
                                          const std::vector<std::int64_t>& grid_ms, int interval_ms,
                                          ProfileMode mode) {
  SyntheticProfile out;
  out.mode = mode;
  out.profile.budget = beta;
  out.profile.run_id = "synthetic-" + mode_name(mode);
  out.profile.interval_ms = interval_ms;
  for (auto t : grid_ms) {
    const auto xi = summarize(cond.at(static_cast<double>(t) / 1000.0, beta), mode);
    ResourceSample s;
    s.t_ms = t;
    s.instr = std::max<std::int64_t>(0, std::llround(xi[0]));
    s.cache_req = std::max<std::int64_t>(0, std::llround(xi[1]));
    s.cache_miss = std::min(s.cache_req, std::max<std::int64_t>(0, std::llround(xi[2])));
    out.profile.samples.push_back(s);
  }
  return out;
}

inline SyntheticProfile synthetic_profile(const msb::MsbSolution& sol, const std::vector<msb::Marginal>& marginals,
                                          const Budget& beta, int interval_ms, ProfileMode mode,
                                          ConditionOptions opt = {.prune = 1e-15}) {
  BudgetConditioner cond(sol, marginals, opt);
  return synthetic_profile(cond, beta, output_grid_ms(cond, interval_ms), interval_ms, mode);
}

/// Conditional weights per grid time, for plotting. Points lighter than
/// min_weight are left out.
inline void write_weights_dump(std::ostream& os, const BudgetConditioner& cond, const Budget& beta,
                               const std::vector<std::int64_t>& grid_ms, double min_weight = 1e-6) {
  os << "t_ms,beta_cache,beta_bw,instr,cache_req,cache_miss,weight\n";
  for (auto t : grid_ms) {
    const auto c = cond.at(static_cast<double>(t) / 1000.0, beta);
    for (Eigen::Index r = 0; r < c.weights.size(); ++r) {
      if (c.weights(r) < min_weight) continue;
      os << t << ',' << beta.cache << ',' << beta.bw << ',' << csv::format_double(c.points(r, 0)) << ','
         << csv::format_double(c.points(r, 1)) << ',' << csv::format_double(c.points(r, 2)) << ','
         << csv::format_double(c.weights(r)) << '\n';
    }
  }
}

}  // namespace cordkit::genprof
