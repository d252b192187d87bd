#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cordkit/msb/cost_chain.hpp"
#include "cordkit/msb/marginal.hpp"

namespace cordkit::msb {

struct SinkhornOptions {
  /// Entropic regularization; unset means 0.05 x median cost entry.
  std::optional<double> epsilon;
  double tol = 1e-8;
  int max_iter = 5000;
  /// Run in the log domain even when the kernels would not underflow.
  bool force_log_domain = false;
};

/// Converged (or best-effort) multimarginal Schrodinger bridge. The plan
/// M = K (.) (u_1 x ... x u_ns) is held implicitly through the kernels and
/// duals; all vectors are stored as logarithms so they never over/underflow.
struct MsbSolution {
  std::vector<Matrix> log_kernels;  // -C^s / epsilon
  std::vector<Vector> log_duals;    // log u_s
  std::vector<Matrix> bimarginals;  // proj_{s,s+1}(M), s = 0..ns-2
  std::vector<Vector> projections;  // proj_s(M), s = 0..ns-1
  double epsilon = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  std::vector<double> residual_history;  // after each full sweep
  std::vector<double> objective_history;  // dual objective after each sweep
  int iterations = 0;
  bool converged = false;
  bool log_domain = false;
  std::int64_t matvecs = 0;  // kernel-vector products performed by the solver

  std::size_t marginal_count() const { return log_duals.size(); }
  Eigen::Index support_size() const { return log_duals.empty() ? 0 : log_duals.front().size(); }

  Vector dual(std::size_t s) const { return log_duals.at(s).array().exp(); }
  Matrix kernel(std::size_t s) const { return log_kernels.at(s).array().exp(); }

  /// proj_{s,s+1}; s is 0-based and must be < marginal_count() - 1.
  const Matrix& bimarginal(std::size_t s) const {
    if (s + 1 >= marginal_count()) throw std::out_of_range("bimarginal index out of range");
    return bimarginals[s];
  }

  /// epsilon * sum_s <mu_s, log u_s>: the objective value implied by the
  /// duals, equal to <C + eps log M, M> at an exactly feasible optimum.
  double dual_objective(const std::vector<Marginal>& marginals) const {
    double v = 0.0;
    for (std::size_t s = 0; s < log_duals.size(); ++s)
      for (Eigen::Index i = 0; i < log_duals[s].size(); ++i)
        if (marginals[s].weights(i) > 0.0) v += marginals[s].weights(i) * log_duals[s](i);
    return epsilon * v;
  }
};

inline double median_entry(const std::vector<Matrix>& mats) {
  std::vector<double> all;
  for (const auto& m : mats) all.insert(all.end(), m.data(), m.data() + m.size());
  if (all.empty()) return 0.0;
  const auto mid = all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2);
  std::nth_element(all.begin(), mid, all.end());
  return *mid;
}

/// 0.05 x the median cost entry; falls back to the mean, then 1.
inline double default_epsilon(const CostChain& chain) {
  const double med = median_entry(chain.matrices);
  if (med > 0.0) return 0.05 * med;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& m : chain.matrices) {
    sum += m.sum();
    count += static_cast<std::size_t>(m.size());
  }
  const double mean = count ? sum / static_cast<double>(count) : 0.0;
  return mean > 0.0 ? 0.05 * mean : 1.0;
}

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Kernel-vector products on log-form vectors. In the plain domain the
/// vector is exponentiated after a max shift and multiplied by the dense
/// kernel; in the log domain a log-sum-exp runs over log K directly.
class KernelOps {
 public:
  KernelOps(const std::vector<Matrix>& log_kernels, bool log_domain, std::int64_t& counter)
      : log_k_(log_kernels), log_domain_(log_domain), counter_(counter) {
    if (!log_domain_)
      for (const auto& lk : log_k_) k_.push_back(lk.array().exp().matrix());
  }

  /// log( K_s^T exp(a) )
  Vector forward(std::size_t s, const Vector& a) const {
    ++counter_;
    if (log_domain_) return lse_cols(log_k_[s], a);
    const double m = a.maxCoeff();
    if (m == kNegInf) return Vector::Constant(a.size(), kNegInf);
    const Vector w = (a.array() - m).exp();
    return (k_[s].transpose() * w).array().log() + m;
  }

  /// log( K_s exp(b) )
  Vector backward(std::size_t s, const Vector& b) const {
    ++counter_;
    if (log_domain_) return lse_rows(log_k_[s], b);
    const double m = b.maxCoeff();
    if (m == kNegInf) return Vector::Constant(b.size(), kNegInf);
    const Vector w = (b.array() - m).exp();
    return (k_[s] * w).array().log() + m;
  }

  // out_j = LSE_i (L(i,j) + a_i)
  static Vector lse_cols(const Matrix& L, const Vector& a) {
    Vector out(L.cols());
    for (Eigen::Index j = 0; j < L.cols(); ++j) {
      const auto col = L.col(j).array() + a.array();
      const double m = col.maxCoeff();
      out(j) = m == kNegInf ? kNegInf : m + std::log((col - m).exp().sum());
    }
    return out;
  }

  // out_i = LSE_j (L(i,j) + b_j)
  static Vector lse_rows(const Matrix& L, const Vector& b) {
    Vector out(L.rows());
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
      const auto row = L.row(i).transpose().array() + b.array();
      const double m = row.maxCoeff();
      out(i) = m == kNegInf ? kNegInf : m + std::log((row - m).exp().sum());
    }
    return out;
  }

 private:
  const std::vector<Matrix>& log_k_;
  std::vector<Matrix> k_;
  bool log_domain_;
  std::int64_t& counter_;
};

/// Forward messages: phi_0 = 1, phi_{s+1} = K_s^T (u_s . phi_s).
inline std::vector<Vector> forward_messages(const KernelOps& ops, const std::vector<Vector>& lu) {
  std::vector<Vector> lphi(lu.size());
  lphi[0] = Vector::Zero(lu[0].size());
  for (std::size_t s = 0; s + 1 < lu.size(); ++s) lphi[s + 1] = ops.forward(s, lu[s] + lphi[s]);
  return lphi;
}

/// Backward messages: psi_{ns-1} = 1, psi_s = K_s (u_{s+1} . psi_{s+1}).
inline std::vector<Vector> backward_messages(const KernelOps& ops, const std::vector<Vector>& lu) {
  const auto ns = lu.size();
  std::vector<Vector> lpsi(ns);
  lpsi[ns - 1] = Vector::Zero(lu[ns - 1].size());
  for (std::size_t s = ns - 1; s-- > 0;) lpsi[s] = ops.backward(s, lu[s + 1] + lpsi[s + 1]);
  return lpsi;
}

inline Vector safe_exp_sum(const Vector& a, const Vector& b, const Vector& c) {
  Vector out(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double v = a(i) + b(i) + c(i);
    out(i) = std::isnan(v) ? 0.0 : std::exp(v);
  }
  return out;
}

}  // namespace detail

/// Multimarginal Sinkhorn on a path-structured cost. Each sweep updates
/// u_1..u_ns in order (Gauss-Seidel) using forward/backward message passing,
/// so one sweep costs O(ns) kernel-vector products.
inline MsbSolution sinkhorn_solve(const std::vector<Marginal>& marginals, const CostChain& chain,
                                  const SinkhornOptions& opt = {}) {
  const auto ns = marginals.size();
  if (ns < 2) throw std::invalid_argument("sinkhorn needs at least two marginals");
  if (chain.matrices.size() != ns - 1) throw std::invalid_argument("cost chain length does not match marginals");
  for (const auto& m : marginals) m.validate();
  const auto n = marginals.front().size();
  for (const auto& c : chain.matrices)
    if (c.rows() != n || c.cols() != n) throw std::invalid_argument("cost matrix shape mismatch");
  if (opt.tol <= 0.0 || opt.max_iter < 1) throw std::invalid_argument("tolerance and iteration cap must be positive");

  MsbSolution sol;
  sol.epsilon = opt.epsilon.value_or(default_epsilon(chain));
  if (!(sol.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  // exp(-690) is near the smallest normal double; beyond that K underflows.
  sol.log_domain = opt.force_log_domain || chain.max_entry() / sol.epsilon > 690.0;
  for (const auto& c : chain.matrices) sol.log_kernels.push_back(-c / sol.epsilon);

  std::vector<Vector> log_mu;
  for (const auto& m : marginals) log_mu.push_back(m.weights.array().log());

  detail::KernelOps ops(sol.log_kernels, sol.log_domain, sol.matvecs);
  auto& lu = sol.log_duals;
  lu.assign(ns, Vector::Zero(n));

  auto lpsi = detail::backward_messages(ops, lu);
  std::vector<Vector> lphi(ns);
  for (int it = 1; it <= opt.max_iter; ++it) {
    lphi[0] = Vector::Zero(n);
    for (std::size_t s = 0; s < ns; ++s) {
      if (s > 0) lphi[s] = ops.forward(s - 1, lu[s - 1] + lphi[s - 1]);
      lu[s] = log_mu[s] - lphi[s] - lpsi[s];
      for (Eigen::Index i = 0; i < n; ++i)
        if (std::isnan(lu[s](i))) lu[s](i) = detail::kNegInf;
    }
    lphi = detail::forward_messages(ops, lu);
    lpsi = detail::backward_messages(ops, lu);
    double res = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      const Vector proj = detail::safe_exp_sum(lu[s], lphi[s], lpsi[s]);
      res = std::max(res, (proj - marginals[s].weights).cwiseAbs().maxCoeff());
    }
    sol.residual_history.push_back(res);
    double obj = 0.0;
    for (std::size_t s = 0; s < ns; ++s)
      for (Eigen::Index i = 0; i < n; ++i)
        if (marginals[s].weights(i) > 0.0) obj += marginals[s].weights(i) * lu[s](i);
    sol.objective_history.push_back(sol.epsilon * obj);
    sol.residual = res;
    sol.iterations = it;
    if (!std::isfinite(res)) break;
    if (res <= opt.tol) {
      sol.converged = true;
      break;
    }
  }

  // Final messages in the log domain regardless of the iteration mode.
  std::int64_t scratch = 0;
  detail::KernelOps exact(sol.log_kernels, true, scratch);
  lphi = detail::forward_messages(exact, lu);
  lpsi = detail::backward_messages(exact, lu);
  for (std::size_t s = 0; s < ns; ++s) sol.projections.push_back(detail::safe_exp_sum(lu[s], lphi[s], lpsi[s]));
  for (std::size_t s = 0; s + 1 < ns; ++s) {
    const Vector left = lu[s] + lphi[s];
    const Vector right = lu[s + 1] + lpsi[s + 1];
    Matrix m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = left(i) + sol.log_kernels[s](i, j) + right(j);
        m(i, j) = std::isnan(v) ? 0.0 : std::exp(v);
      }
    sol.bimarginals.push_back(std::move(m));
  }
  return sol;
}

}  // namespace cordkit::msb
