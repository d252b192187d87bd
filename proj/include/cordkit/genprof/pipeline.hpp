#pragma once

#include <optional>
#include <vector>

#include "cordkit/genprof/conditional.hpp"
#include "cordkit/genprof/marginals.hpp"
#include "cordkit/msb/cost_chain.hpp"
#include "cordkit/msb/sinkhorn.hpp"

namespace cordkit::genprof {

struct GenerativeOptions {
  double snapshot_spacing = kDefaultSnapshotSpacing;
  std::optional<std::vector<Budget>> trained_budgets;  // all budgets in the set when empty
  msb::CostOptions cost;
  msb::SinkhornOptions sinkhorn;
  ConditionOptions condition{.prune = 1e-15};
  int output_interval_ms = kDefaultIntervalMs;
};

/// Solved bridge over one workload's profiles, ready for budget queries.
struct GenerativeModel {
  std::vector<msb::Marginal> marginals;
  msb::CostChain chain;
  msb::MsbSolution solution;

  BudgetConditioner conditioner(const ConditionOptions& opt) const { return {solution, marginals, opt}; }
};

inline GenerativeModel fit_generative_model(const ProfileSet& set, const GenerativeOptions& opt = {}) {
  GenerativeModel m;
  m.marginals = build_marginals(set, snapshot_grid(profile_horizon(set), opt.snapshot_spacing), opt.trained_budgets);
  auto cost = opt.cost;
  cost.budget_dims = kResourceTypes;
  m.chain = msb::build_cost_chain(m.marginals, cost);
  m.solution = msb::sinkhorn_solve(m.marginals, m.chain, opt.sinkhorn);
  return m;
}

/// One synthetic profile per budget, in the order given.
inline std::vector<SyntheticProfile> synthesize(const GenerativeModel& model, const std::vector<Budget>& budgets,
                                                ProfileMode mode, const GenerativeOptions& opt = {}) {
  const auto cond = model.conditioner(opt.condition);
  const auto grid = output_grid_ms(cond, opt.output_interval_ms);
  std::vector<SyntheticProfile> out;
  for (const auto& b : budgets) out.push_back(synthetic_profile(cond, b, grid, opt.output_interval_ms, mode));
  return out;
}

}  // namespace cordkit::genprof
