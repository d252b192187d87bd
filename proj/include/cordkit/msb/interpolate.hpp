#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "cordkit/msb/marginal.hpp"
#include "cordkit/msb/sinkhorn.hpp"

namespace cordkit::msb {

/// Locates the snapshot interval containing t. Returns (s, lambda) with
/// t in [t_s, t_{s+1}] and lambda = (t - t_s) / (t_{s+1} - t_s). Interior
/// snapshot times resolve to the interval they open.
inline std::pair<std::size_t, double> locate_time(const std::vector<Marginal>& marginals, double t) {
  const auto ns = marginals.size();
  if (ns < 2) throw std::invalid_argument("need at least two marginals");
  if (t < marginals.front().time || t > marginals.back().time)
    throw std::out_of_range("time outside the solved range");
  std::size_t s = 0;
  while (s + 2 < ns && t >= marginals[s + 1].time) ++s;
  const double t0 = marginals[s].time;
  const double t1 = marginals[s + 1].time;
  return {s, (t - t0) / (t1 - t0)};
}

/// a + lambda (b - a) keeps coincident endpoints bit-exact; lambda = 1
/// returns b itself, since a + (b - a) can round away from it.
inline double blend(double a, double b, double lambda) {
  if (lambda == 0.0) return a;
  if (lambda == 1.0) return b;
  return a + lambda * (b - a);
}

/// mu_t: n^2 points (1-lambda) eta_i(t_s) + lambda eta_j(t_{s+1}) weighted by
/// the bimarginal entry (i, j), normalized to unit mass. Row index i*n + j.
inline ScatteredDistribution interpolate(const MsbSolution& sol, const std::vector<Marginal>& marginals, double t) {
  const auto [s, lambda] = locate_time(marginals, t);
  const auto& a = marginals[s].points;
  const auto& b = marginals[s + 1].points;
  const auto& m = sol.bimarginal(s);
  const auto n = a.rows();
  ScatteredDistribution out;
  out.points.resize(n * n, a.cols());
  out.weights.resize(n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto r = i * n + j;
      for (Eigen::Index c = 0; c < a.cols(); ++c) out.points(r, c) = blend(a(i, c), b(j, c), lambda);
      out.weights(r) = m(i, j);
    }
  const double total = out.weights.sum();
  if (total > 0.0) out.weights /= total;
  return out;
}

}  // namespace cordkit::msb
