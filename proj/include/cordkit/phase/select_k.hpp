#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "cordkit/phase/gmm.hpp"

namespace cordkit::phase {

/// Davies-Bouldin index over the non-empty clusters (lower is better).
/// Zero when every cluster is a single repeated point.
inline double davies_bouldin(const Matrix& x, const std::vector<int>& labels) {
  std::map<int, std::vector<Eigen::Index>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(static_cast<Eigen::Index>(i));
  if (members.size() < 2) return 0.0;
  std::vector<Vector> centroid;
  std::vector<double> spread;
  for (const auto& [label, idx] : members) {
    Vector c = Vector::Zero(x.cols());
    for (auto i : idx) c += x.row(i).transpose();
    c /= static_cast<double>(idx.size());
    double s = 0.0;
    for (auto i : idx) s += (x.row(i).transpose() - c).norm();
    centroid.push_back(c);
    spread.push_back(s / static_cast<double>(idx.size()));
  }
  const auto k = centroid.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const double sep = (centroid[i] - centroid[j]).norm();
      const double num = spread[i] + spread[j];
      const double r = sep > 0.0 ? num / sep : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      worst = std::max(worst, r);
    }
    sum += worst;
  }
  return sum / static_cast<double>(k);
}

/// Renumbers labels 0, 1, ... in order of first appearance.
inline std::vector<int> relabel_by_appearance(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, fresh] = remap.emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

struct SelectKOptions {
  int k_min = 3;
  int k_max = 20;
  double min_gain = 0.05;  // relative Davies-Bouldin improvement that still pays for k+1
  GmmOptions gmm;
};

struct SelectKResult {
  int k = 0;
  std::vector<int> labels;          // relabelled by first appearance
  std::map<int, double> db_scores;  // every k that was fitted
};

inline std::size_t distinct_rows(const Matrix& x) {
  std::set<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index c = 0; c < x.cols(); ++c) r[static_cast<std::size_t>(c)] = x(i, c);
    rows.insert(std::move(r));
  }
  return rows.size();
}

/// Fits GMMs for increasing k on standardized features and stops at the
/// smallest k whose Davies-Bouldin score improves by less than min_gain
/// (relative) when going to k+1. k_max is capped by the number of distinct
/// points; identical points give k_min with a single label.
inline SelectKResult select_k(const Matrix& features, std::uint64_t seed, const SelectKOptions& opt = {}) {
  if (opt.k_min < 1 || opt.k_max < opt.k_min) throw std::invalid_argument("bad k range");
  if (features.rows() < opt.k_min) throw std::invalid_argument("fewer points than k_min");
  const auto distinct = static_cast<int>(distinct_rows(features));
  SelectKResult res;
  if (distinct == 1) {
    res.k = opt.k_min;
    res.labels.assign(static_cast<std::size_t>(features.rows()), 0);
    return res;
  }
  const Matrix z = standardize_columns(features);
  const int hi = std::min(opt.k_max, distinct);
  const int lo = std::min(opt.k_min, hi);
  std::map<int, std::vector<int>> labels;
  auto score = [&](int k) {
    if (!res.db_scores.count(k)) {
      auto g = fit_gmm(z, k, seed, opt.gmm);
      res.db_scores[k] = davies_bouldin(z, g.labels);
      labels[k] = std::move(g.labels);
    }
    return res.db_scores[k];
  };
  int chosen = hi;
  for (int k = lo; k < hi; ++k) {
    const double cur = score(k);
    const double next = score(k + 1);
    if (cur <= 0.0 || (cur - next) / cur < opt.min_gain) {
      chosen = k;
      break;
    }
  }
  score(chosen);
  res.k = chosen;
  res.labels = relabel_by_appearance(labels[chosen]);
  return res;
}

}  // namespace cordkit::phase
