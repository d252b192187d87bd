#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cordkit/core/rng.hpp"

namespace cordkit::phase {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct GmmOptions {
  double tol = 1e-6;  // on the mean log-likelihood per point
  int max_iter = 200;
  int restarts = 3;
  double var_floor = 1e-6;
};

/// Diagonal-covariance Gaussian mixture.
struct GmmFit {
  int k = 0;
  Matrix means;      // k x d
  Matrix variances;  // k x d
  Vector weights;    // k
  double log_likelihood = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::vector<int> labels;  // argmax responsibility per point
};

/// Column-wise z-scores; constant columns are only centred.
inline Matrix standardize_columns(const Matrix& x) {
  Matrix z = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double mean = x.col(c).mean();
    const double sd = std::sqrt((x.col(c).array() - mean).square().mean());
    z.col(c) = (x.col(c).array() - mean) / (sd > 0.0 ? sd : 1.0);
  }
  return z;
}

/// k-means++ seeding: first centre uniform, the rest by squared distance.
inline Matrix kmeans_pp(const Matrix& x, int k, Rng& rng) {
  const auto n = x.rows();
  Matrix centres(k, x.cols());
  centres.row(0) = x.row(static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n)) % n);
  Vector d2 = (x.rowwise() - centres.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      pick = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (d2(i) <= 0.0) continue;
        pick = i;
        acc += d2(i);
        if (acc > target) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n)) % n;
    }
    centres.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centres.row(c)).rowwise().squaredNorm());
  }
  return centres;
}

namespace detail {

// Log density of every point under every component, plus the per-point
// log-sum-exp over components.
inline double e_step(const Matrix& x, const GmmFit& g, Matrix& log_r) {
  const auto n = x.rows();
  const auto d = x.cols();
  log_r.resize(n, g.k);
  for (int c = 0; c < g.k; ++c) {
    double norm = std::log(g.weights(c));
    for (Eigen::Index j = 0; j < d; ++j) norm -= 0.5 * std::log(2.0 * std::numbers::pi * g.variances(c, j));
    for (Eigen::Index i = 0; i < n; ++i) {
      double q = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double diff = x(i, j) - g.means(c, j);
        q += diff * diff / g.variances(c, j);
      }
      log_r(i, c) = norm - 0.5 * q;
    }
  }
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = log_r.row(i).maxCoeff();
    const double lse = m + std::log((log_r.row(i).array() - m).exp().sum());
    log_r.row(i).array() -= lse;
    ll += lse;
  }
  return ll;
}

inline GmmFit fit_once(const Matrix& x, int k, Rng& rng, const GmmOptions& opt) {
  const auto n = x.rows();
  const auto d = x.cols();
  GmmFit g;
  g.k = k;
  g.means = kmeans_pp(x, k, rng);
  const Vector global_var = ((x.rowwise() - x.colwise().mean()).array().square().colwise().mean()).transpose();

  // Hard assignment to the nearest seed gives the starting parameters.
  std::vector<int> near(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double dist = (x.row(i) - g.means.row(c)).squaredNorm();
      if (dist < best) {
        best = dist;
        near[static_cast<std::size_t>(i)] = c;
      }
    }
  }
  g.weights = Vector::Zero(k);
  g.variances = Matrix::Zero(k, d);
  for (Eigen::Index i = 0; i < n; ++i) g.weights(near[static_cast<std::size_t>(i)]) += 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = near[static_cast<std::size_t>(i)];
    g.variances.row(c).array() += (x.row(i) - g.means.row(c)).array().square() / g.weights(c);
  }
  for (int c = 0; c < k; ++c) {
    if (g.weights(c) < 2.0) g.variances.row(c) = global_var.transpose();
    g.variances.row(c) = g.variances.row(c).cwiseMax(opt.var_floor);
  }
  g.weights = (g.weights.array() + 1e-12) / (static_cast<double>(n) + 1e-12 * k);

  Matrix log_r;
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opt.max_iter; ++it) {
    const double ll = e_step(x, g, log_r);
    g.log_likelihood = ll;
    g.iterations = it;
    if (std::abs(ll - prev) <= opt.tol * static_cast<double>(n)) break;
    prev = ll;
    const Matrix r = log_r.array().exp();
    for (int c = 0; c < k; ++c) {
      const double nk = r.col(c).sum();
      if (nk < 1e-10) continue;  // empty component keeps its parameters
      g.weights(c) = nk / static_cast<double>(n);
      g.means.row(c) = (r.col(c).transpose() * x) / nk;
      const Matrix diff = x.rowwise() - g.means.row(c);
      g.variances.row(c) = ((r.col(c).transpose() * diff.array().square().matrix()) / nk).cwiseMax(opt.var_floor);
    }
    g.weights /= g.weights.sum();
  }
  g.log_likelihood = e_step(x, g, log_r);
  g.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best;
    log_r.row(i).maxCoeff(&best);
    g.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return g;
}

}  // namespace detail

/// Best of opt.restarts EM runs by log-likelihood; restart r is seeded from
/// (seed, k, r).
inline GmmFit fit_gmm(const Matrix& x, int k, std::uint64_t seed, const GmmOptions& opt = {}) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  if (x.rows() < k) throw std::invalid_argument("fewer points than components");
  GmmFit best;
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(r)}));
    auto g = detail::fit_once(x, k, rng, opt);
    if (r == 0 || g.log_likelihood > best.log_likelihood) best = std::move(g);
  }
  return best;
}

}  // namespace cordkit::phase
