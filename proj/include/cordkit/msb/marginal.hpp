#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace cordkit::msb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Weighted point cloud observed at one snapshot time. Rows of `points` are
/// augmented states (resource state followed by budget coordinates).
struct Marginal {
  Matrix points;
  Vector weights;
  double time = 0.0;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }

  void validate() const {
    if (points.rows() != weights.size()) throw std::invalid_argument("marginal: points/weights size mismatch");
    if (points.rows() == 0) throw std::invalid_argument("marginal: empty support");
    if ((weights.array() < 0.0).any()) throw std::invalid_argument("marginal: negative weight");
    if (std::abs(weights.sum() - 1.0) > 1e-12) throw std::invalid_argument("marginal: weights must sum to 1");
  }
};

/// Weighted scattered distribution; may contain coincident points.
struct ScatteredDistribution {
  Matrix points;
  Vector weights;

  /// Combines exactly coincident points, summing their weights. Rows come
  /// back in lexicographic order so two merged distributions compare directly.
  ScatteredDistribution merged() const {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(points.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto less = [&](Eigen::Index a, Eigen::Index b) {
      for (Eigen::Index c = 0; c < points.cols(); ++c) {
        if (points(a, c) < points(b, c)) return true;
        if (points(a, c) > points(b, c)) return false;
      }
      return false;
    };
    std::stable_sort(order.begin(), order.end(), less);
    std::vector<Eigen::Index> heads;
    std::vector<double> sums;
    for (auto idx : order) {
      if (!heads.empty() && !less(heads.back(), idx) && !less(idx, heads.back())) {
        sums.back() += weights(idx);
      } else {
        heads.push_back(idx);
        sums.push_back(weights(idx));
      }
    }
    ScatteredDistribution out;
    out.points.resize(static_cast<Eigen::Index>(heads.size()), points.cols());
    out.weights.resize(static_cast<Eigen::Index>(heads.size()));
    for (std::size_t k = 0; k < heads.size(); ++k) {
      out.points.row(static_cast<Eigen::Index>(k)) = points.row(heads[k]);
      out.weights(static_cast<Eigen::Index>(k)) = sums[k];
    }
    return out;
  }
};

}  // namespace cordkit::msb
