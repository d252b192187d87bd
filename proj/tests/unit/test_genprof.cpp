#include <gtest/gtest.h>

#include "cordkit/genprof/pipeline.hpp"
#include "cordkit/workload/ground_truth.hpp"

using namespace cordkit;
using namespace cordkit::genprof;

namespace {

GroundTruthSpec two_phase(double noise) {
  return {"two", {{6000, 300, 12, 5, 0.3, 0.1}, {8000, 700, 4, 16, 0.5, 0.3}}, noise, 10};
}

std::vector<Budget> corners() { return {{1, 1}, {1, 5}, {5, 1}, {5, 5}}; }

msb::SinkhornOptions tight() { return {.tol = 1e-10, .max_iter = 20000}; }

}  // namespace

TEST(BuildMarginals, TwoHundredFiftyEquallyWeightedPoints) {
  const auto w = make_ground_truth(two_phase(0.05));
  std::vector<Budget> bprime;
  for (int c : {1, 5, 10, 15, 20})
    for (int b : {1, 5, 10, 15, 20}) bprime.push_back({c, b});
  const auto set = sample_profile_set(w, bprime, 10, {20, 20}, 3);
  const auto times = snapshot_grid(profile_horizon(set));
  const auto ms = build_marginals(set, times);
  for (std::size_t s = 0; s < ms.size(); ++s) {
    EXPECT_EQ(ms[s].size(), 250);
    EXPECT_EQ(ms[s].dim(), 5);
    EXPECT_TRUE((ms[s].weights.array() == 1.0 / 250.0).all());
    EXPECT_DOUBLE_EQ(ms[s].time, 0.05 * static_cast<double>(s));
  }
}

TEST(BuildMarginals, SingleProfileIsPointMass) {
  const auto w = make_ground_truth(two_phase(0.0));
  const auto set = sample_profile_set(w, {{2, 3}}, 1, {20, 20}, 3);
  const auto ms = build_marginals(set, {0.0, 0.05});
  ASSERT_EQ(ms[0].size(), 1);
  EXPECT_EQ(ms[0].weights(0), 1.0);
  EXPECT_EQ(ms[0].points(0, 0), set.profiles[0].samples[0].instr);
  EXPECT_EQ(ms[0].points(0, 3), 2.0);
  EXPECT_EQ(ms[0].points(0, 4), 3.0);
}

TEST(BuildMarginals, FinishedRunsArePaddedWithZeros) {
  const auto w = make_ground_truth(two_phase(0.0));
  const auto set = sample_profile_set(w, {{1, 1}, {20, 20}}, 1, {20, 20}, 3);
  const auto times = snapshot_grid(profile_horizon(set));
  const auto ms = build_marginals(set, times);
  const auto& last = ms.back();
  // The faster run finished long before the horizon.
  EXPECT_EQ(last.points(1, 0), 0.0);
  EXPECT_EQ(last.points(1, 1), 0.0);
  EXPECT_EQ(last.points(1, 2), 0.0);
  EXPECT_GE(times.back(), profile_horizon(set));
}

TEST(BuildMarginals, Errors) {
  ProfileSet empty;
  EXPECT_THROW(build_marginals(empty, {0.0}), std::invalid_argument);
  const auto w = make_ground_truth(two_phase(0.0));
  const auto set = sample_profile_set(w, {{1, 1}}, 2, {20, 20}, 3);
  EXPECT_THROW(build_marginals(set, {0.0, 0.05}, std::vector<Budget>{{1, 1}, {5, 5}}), std::invalid_argument);
}

TEST(Conditional, SingleBudgetKeepsBridgeWeights) {
  const auto w = make_ground_truth(two_phase(0.05));
  const auto set = sample_profile_set(w, {{4, 4}}, 6, {20, 20}, 8);
  const auto model = fit_generative_model(set, {.sinkhorn = tight()});
  for (double t : {0.0, 0.07, 0.2}) {
    const auto c = conditional_at(model.solution, model.marginals, t, {4, 4});
    const auto mu = msb::interpolate(model.solution, model.marginals, t);
    msb::ScatteredDistribution stripped{mu.points.leftCols(kStateDims), mu.weights};
    const auto ref = stripped.merged();
    ASSERT_EQ(c.points.rows(), ref.points.rows());
    EXPECT_EQ(c.points, ref.points);
    EXPECT_LE((c.weights - ref.weights).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Conditional, TrainedBudgetNoiseFreeIsNearPointMass) {
  const auto w = make_ground_truth(two_phase(0.0));
  const auto set = sample_profile_set(w, corners(), 3, {20, 20}, 8);
  const auto model = fit_generative_model(set, {.sinkhorn = tight()});
  const auto by = set.by_budget();
  for (const auto& b : corners()) {
    const auto& truth = *by.at(b).front();
    for (std::size_t s = 0; s < model.marginals.size(); s += 3) {
      const double t = model.marginals[s].time;
      const auto c = conditional_at(model.solution, model.marginals, t, b);
      const auto xi = state_at(truth, t);
      Eigen::Index best;
      const double top = c.weights.maxCoeff(&best);
      EXPECT_GE(top, 0.99) << b << " t=" << t;
      EXPECT_EQ(c.points(best, 0), xi[0]);
      EXPECT_EQ(c.points(best, 1), xi[1]);
      EXPECT_EQ(c.points(best, 2), xi[2]);
    }
  }
}

TEST(Conditional, MidpointBudgetOfLinearWorkload) {
  const auto w = make_ground_truth({"lin", {{40000, 1000, 20, 0}}, 0.0, 10});
  const auto set = sample_profile_set(w, {{1, 1}, {5, 1}}, 2, {20, 20}, 8);
  const auto model = fit_generative_model(set, {.sinkhorn = tight()});
  const double interpolant = 0.5 * (w.rate(0, {1, 1}) + w.rate(0, {5, 1}));
  // Both runs are still executing over the first 0.3 s.
  for (double t = 0.0; t <= 0.3; t += 0.01) {
    const auto c = conditional_at(model.solution, model.marginals, t, {3, 1});
    const auto ml = summarize(c, ProfileMode::MaxLikelihood);
    EXPECT_LE(std::abs(ml[0] - interpolant), 0.1 * interpolant) << "t=" << t;
  }
}

TEST(Conditional, WeightsAreNormalized) {
  const auto w = make_ground_truth(two_phase(0.05));
  const auto set = sample_profile_set(w, corners(), 3, {20, 20}, 9);
  const auto model = fit_generative_model(set);
  const auto cond = model.conditioner({.prune = 1e-15});
  for (double t = 0.0; t <= model.marginals.back().time; t += 0.013)
    for (const Budget b : {Budget{1, 1}, Budget{3, 2}, Budget{6, 6}})
      EXPECT_NEAR(cond.at(t, b).weights.sum(), 1.0, 1e-10);
}

TEST(Conditional, FarBudgetIsRejected) {
  const auto w = make_ground_truth(two_phase(0.0));
  const auto set = sample_profile_set(w, {{1, 1}}, 2, {20, 20}, 9);
  const auto model = fit_generative_model(set);
  EXPECT_THROW(conditional_at(model.solution, model.marginals, 0.0, {20, 20}), std::domain_error);
  EXPECT_THROW(conditional_at(model.solution, model.marginals, 99.0, {1, 1}), std::out_of_range);
}

TEST(Summarize, BimodalMaxLikelihoodAndMean) {
  ConditionalDistribution c;
  c.points.resize(2, 3);
  c.points << 10, 0, 0, 100, 0, 0;
  c.weights.resize(2);
  c.weights << 0.6, 0.4;
  EXPECT_EQ(summarize(c, ProfileMode::MaxLikelihood)[0], 10.0);
  EXPECT_NEAR(summarize(c, ProfileMode::Mean)[0], 46.0, 1e-12);
}

TEST(Summarize, TiesGoToLowestIndex) {
  ConditionalDistribution c;
  c.points.resize(3, 3);
  c.points << 5, 0, 0, 7, 0, 0, 9, 0, 0;
  c.weights = msb::Vector::Constant(3, 1.0 / 3.0);
  EXPECT_EQ(summarize(c, ProfileMode::MaxLikelihood)[0], 5.0);
}

TEST(SyntheticProfile, PointMassModesAgree) {
  const auto w = make_ground_truth(two_phase(0.0));
  const auto set = sample_profile_set(w, {{2, 2}}, 1, {20, 20}, 1);
  const auto model = fit_generative_model(set);
  const auto ml = synthesize(model, {{2, 2}}, ProfileMode::MaxLikelihood)[0];
  const auto mean = synthesize(model, {{2, 2}}, ProfileMode::Mean)[0];
  EXPECT_EQ(ml.profile.samples, mean.profile.samples);
  EXPECT_EQ(ml.profile.run_id, "synthetic-ml");
  EXPECT_EQ(mean.profile.run_id, "synthetic-mean");
}

TEST(SyntheticProfile, TrainedBudgetReproducesSnapshots) {
  const auto w = make_ground_truth(two_phase(0.0));
  const auto set = sample_profile_set(w, corners(), 2, {20, 20}, 4);
  const auto model = fit_generative_model(set, {.sinkhorn = tight()});
  const auto by = set.by_budget();
  const auto profs = synthesize(model, corners(), ProfileMode::MaxLikelihood);
  for (std::size_t k = 0; k < profs.size(); ++k) {
    const auto& truth = *by.at(corners()[k]).front();
    const auto& p = profs[k].profile;
    EXPECT_EQ(p.budget, corners()[k]);
    for (const auto& s : p.samples) {
      if (s.t_ms % 50 != 0) continue;  // snapshot times
      const auto xi = state_at(truth, static_cast<double>(s.t_ms) / 1000.0);
      EXPECT_EQ(s.instr, xi[0]) << corners()[k] << " t=" << s.t_ms;
      EXPECT_EQ(s.cache_req, xi[1]);
      EXPECT_EQ(s.cache_miss, xi[2]);
    }
  }
}

TEST(SyntheticProfile, OneSamplePerGridTimeAndDeterministic) {
  const auto w = make_ground_truth(two_phase(0.05));
  const auto set = sample_profile_set(w, corners(), 3, {20, 20}, 4);
  const auto a = synthesize(fit_generative_model(set), {{3, 3}}, ProfileMode::Mean)[0];
  const auto b = synthesize(fit_generative_model(set), {{3, 3}}, ProfileMode::Mean)[0];
  EXPECT_EQ(a.profile, b.profile);
  for (std::size_t k = 0; k < a.profile.samples.size(); ++k) {
    EXPECT_EQ(a.profile.samples[k].t_ms, static_cast<std::int64_t>(10 * k));
    EXPECT_GE(a.profile.samples[k].instr, 0);
  }
  EXPECT_NO_THROW(a.profile.validate());
}
