#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cordkit/msb/marginal.hpp"

namespace cordkit::msb {

struct CostOptions {
  /// Multiplier on the (standardized) budget coordinates.
  double beta_weight = 10.0;
  /// Number of trailing coordinates that hold the budget.
  int budget_dims = 2;
  /// Standardize every coordinate to mean 0 / std 1 over all support points.
  bool standardize = true;
};

/// Path-structured cost: one matrix per consecutive snapshot pair, holding
/// squared Euclidean distances between transformed support points.
struct CostChain {
  std::vector<Matrix> matrices;
  Vector offset;
  Vector scale;
  double beta_weight = 1.0;
  int budget_dims = 0;

  /// Maps a raw augmented state into the space the distances are taken in.
  Vector transform(const Eigen::Ref<const Vector>& raw) const {
    Vector z = (raw - offset).cwiseQuotient(scale);
    const auto d = z.size();
    for (Eigen::Index k = d - budget_dims; k < d; ++k) z(k) *= beta_weight;
    return z;
  }

  Matrix transform_rows(const Matrix& raw) const {
    Matrix z = (raw.rowwise() - offset.transpose()).array().rowwise() / scale.transpose().array();
    const auto d = z.cols();
    for (Eigen::Index k = d - budget_dims; k < d; ++k) z.col(k) *= beta_weight;
    return z;
  }

  double max_entry() const {
    double m = 0.0;
    for (const auto& c : matrices) m = std::max(m, c.maxCoeff());
    return m;
  }
};

inline Matrix squared_distances(const Matrix& a, const Matrix& b) {
  // |a|^2 + |b|^2 - 2ab can go slightly negative from cancellation; an
  // explicit loop keeps every entry exact for identical rows.
  Matrix out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return out;
}

inline CostChain build_cost_chain(const std::vector<Marginal>& marginals, const CostOptions& opt = {}) {
  if (marginals.size() < 2) throw std::invalid_argument("cost chain needs at least two marginals");
  const auto n = marginals.front().size();
  const auto dim = marginals.front().dim();
  if (opt.budget_dims < 0 || opt.budget_dims > dim) throw std::invalid_argument("budget_dims out of range");
  for (std::size_t s = 0; s < marginals.size(); ++s) {
    if (marginals[s].size() != n || marginals[s].dim() != dim)
      throw std::invalid_argument("all marginals need the same support size and dimension");
    if (s > 0 && !(marginals[s].time > marginals[s - 1].time))
      throw std::invalid_argument("snapshot times must be strictly increasing");
  }

  CostChain chain;
  chain.beta_weight = opt.beta_weight;
  chain.budget_dims = opt.budget_dims;
  chain.offset = Vector::Zero(dim);
  chain.scale = Vector::Ones(dim);
  if (opt.standardize) {
    const double count = static_cast<double>(n) * static_cast<double>(marginals.size());
    Vector mean = Vector::Zero(dim);
    for (const auto& m : marginals) mean += m.points.colwise().sum().transpose();
    mean /= count;
    Vector var = Vector::Zero(dim);
    for (const auto& m : marginals)
      var += (m.points.rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
    var /= count;
    chain.offset = mean;
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double sd = std::sqrt(var(k));
      chain.scale(k) = sd > 0.0 ? sd : 1.0;
    }
  }

  std::vector<Matrix> z;
  z.reserve(marginals.size());
  for (const auto& m : marginals) z.push_back(chain.transform_rows(m.points));
  for (std::size_t s = 0; s + 1 < z.size(); ++s) chain.matrices.push_back(squared_distances(z[s], z[s + 1]));
  return chain;
}

}  // namespace cordkit::msb
