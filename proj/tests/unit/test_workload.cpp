#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cordkit/workload/ground_truth.hpp"
#include "cordkit/workload/ground_truth_io.hpp"
#include "cordkit/workload/profile_io.hpp"

using namespace cordkit;

namespace {

GroundTruthSpec four_phase_spec(double noise) {
  GroundTruthSpec s;
  s.name = "four";
  s.noise_level = noise;
  s.phases = {{40000, 1000, 20, 10, 0.3, 0.1},
              {30000, 400, 10, 30, 0.6, 0.4},
              {50000, 1500, 40, 5, 0.1, 0.05},
              {20000, 700, 5, 5, 0.5, 0.2}};
  return s;
}

ProfileSet random_set(std::mt19937_64& rng, int profiles) {
  ProfileSet set;
  set.workload = "rand";
  set.grid_max = {20, 20};
  std::uniform_int_distribution<int> bud(1, 20), len(1, 30), cnt(0, 5000);
  for (int p = 0; p < profiles; ++p) {
    ResourceProfile prof;
    prof.run_id = "r" + std::to_string(p);
    prof.budget = {bud(rng), bud(rng)};
    const int n = len(rng);
    for (int k = 0; k < n; ++k) {
      ResourceSample s{k * 10, cnt(rng), 0, 0};
      s.cache_req = cnt(rng);
      s.cache_miss = s.cache_req / 3;
      prof.samples.push_back(s);
    }
    set.profiles.push_back(std::move(prof));
  }
  return set;
}

}  // namespace

TEST(GroundTruth, ConstantPhaseRateIsBudgetIndependent) {
  const auto w = make_ground_truth({"c", {{5000, 100}}, 0.0, 10});
  for (const auto& b : full_budget_grid({20, 20})) {
    EXPECT_EQ(w.rate(0, b), 100.0);
    EXPECT_EQ(w.rate(4999, b), 100.0);
  }
}

TEST(GroundTruth, LinearCacheCoefficient) {
  const auto w = make_ground_truth({"c", {{5000, 100, 7, 0}}, 0.0, 10});
  EXPECT_EQ(w.rate(10, {3, 1}), 100.0 + 2 * 7.0);
  EXPECT_EQ(w.rate(10, {3, 9}), 100.0 + 2 * 7.0);
}

TEST(GroundTruth, RejectsBadSpecs) {
  EXPECT_THROW(make_ground_truth({"x", {}, 0.0, 10}), std::invalid_argument);
  EXPECT_THROW(make_ground_truth({"x", {{100, 0.0}}, 0.0, 10}), std::invalid_argument);
  EXPECT_THROW(make_ground_truth({"x", {{100, -5.0}}, 0.0, 10}), std::invalid_argument);
  EXPECT_THROW(make_ground_truth({"x", {{0, 5.0}}, 0.0, 10}), std::invalid_argument);
  EXPECT_THROW(make_ground_truth({"x", {{100, 5.0}}, 0.4, 10}), std::invalid_argument);
}

TEST(GroundTruth, RateIsMonotoneInBudget) {
  const auto w = make_ground_truth(four_phase_spec(0.0));
  const auto grid = full_budget_grid({20, 20});
  for (std::int64_t ins = 0; ins < w.total_instructions(); ins += 997)
    for (const auto& a : grid)
      for (const auto& b : {Budget{a.cache + 1, a.bw}, Budget{a.cache, a.bw + 1}}) EXPECT_LE(w.rate(ins, a), w.rate(ins, b));
}

TEST(SampleProfile, NoiseFreeSinglePhaseLength) {
  const auto w = make_ground_truth({"c", {{1050, 100}}, 0.0, 10});
  const auto p = sample_profile(w, {1, 1}, 1);
  ASSERT_EQ(p.samples.size(), 11u);  // ceil(1050 / 100)
  for (std::size_t k = 0; k < p.samples.size(); ++k) {
    EXPECT_EQ(p.samples[k].instr, 100);
    EXPECT_EQ(p.samples[k].t_ms, static_cast<std::int64_t>(10 * k));
  }
}

TEST(SampleProfile, NoiseFreeReproducesRateFunction) {
  const auto w = make_ground_truth(four_phase_spec(0.0));
  for (const Budget b : {Budget{1, 1}, Budget{7, 3}, Budget{20, 20}}) {
    const auto p = sample_profile(w, b, 5);
    const auto cum = p.cumulative_before();
    for (std::size_t k = 0; k < p.samples.size(); ++k)
      EXPECT_EQ(p.samples[k].instr, std::llround(w.rate(cum[k], b)));
    EXPECT_GE(p.total_instructions(), w.total_instructions());
    EXPECT_LT(cum[p.samples.size() - 1], w.total_instructions());
  }
}

TEST(SampleProfile, SameSeedIsBitIdentical) {
  const auto w = make_ground_truth(four_phase_spec(0.05));
  EXPECT_EQ(sample_profile(w, {4, 4}, 77), sample_profile(w, {4, 4}, 77));
  EXPECT_NE(sample_profile(w, {4, 4}, 77), sample_profile(w, {4, 4}, 78));
}

TEST(SampleProfile, NoisyMeanMatchesTrueRate) {
  const auto w = make_ground_truth({"c", {{20000, 1000, 0, 0}}, 0.05, 10});
  double sum = 0.0;
  int count = 0;
  for (int run = 0; run < 1000; ++run) {
    const auto p = sample_profile(w, {1, 1}, derive_seed(42, {static_cast<std::uint64_t>(run)}));
    // The final interval may be cut short by the total; use the full ones.
    for (std::size_t k = 0; k + 1 < p.samples.size(); ++k) {
      sum += static_cast<double>(p.samples[k].instr);
      ++count;
    }
  }
  EXPECT_NEAR(sum / count, 1000.0, 10.0);
}

TEST(SampleProfile, NoiseStaysWithinThreeSigma) {
  const auto w = make_ground_truth({"c", {{200000, 1000, 0, 0}}, 0.1, 10});
  const auto p = sample_profile(w, {1, 1}, 3);
  for (const auto& s : p.samples) {
    EXPECT_GE(s.instr, 700);
    EXPECT_LE(s.instr, 1300);
    EXPECT_LE(s.cache_miss, s.cache_req);
  }
}

TEST(SampleProfileSet, SeedsAreStablePerRun) {
  const auto w = make_ground_truth(four_phase_spec(0.05));
  const auto a = sample_profile_set(w, {{1, 1}, {5, 5}}, 3, {20, 20}, 9);
  const auto b = sample_profile_set(w, {{5, 5}}, 3, {20, 20}, 9);
  ASSERT_EQ(a.profiles.size(), 6u);
  EXPECT_EQ(a.profiles[3], b.profiles[0]);
  EXPECT_THROW(sample_profile_set(w, {{21, 1}}, 1, {20, 20}, 9), std::invalid_argument);
}

TEST(ProfileIo, HeaderOnlyIsEmptySet) {
  std::istringstream is("run_id,beta_cache,beta_bw,t_ms,instr,cache_req,cache_miss\n");
  EXPECT_TRUE(read_profiles(is).profiles.empty());
}

TEST(ProfileIo, OneRowIsOneProfile) {
  std::istringstream is("run_id,beta_cache,beta_bw,t_ms,instr,cache_req,cache_miss\nr0,2,5,0,100,30,3\n");
  const auto set = read_profiles(is);
  ASSERT_EQ(set.profiles.size(), 1u);
  EXPECT_EQ(set.profiles[0].budget, (Budget{2, 5}));
  ASSERT_EQ(set.profiles[0].samples.size(), 1u);
  EXPECT_EQ(set.profiles[0].samples[0], (ResourceSample{0, 100, 30, 3}));
}

TEST(ProfileIo, RoundTripOf250Profiles) {
  const auto w = make_ground_truth(four_phase_spec(0.05));
  std::vector<Budget> bprime;
  for (int c : {1, 5, 10, 15, 20})
    for (int b : {1, 5, 10, 15, 20}) bprime.push_back({c, b});
  const auto set = sample_profile_set(w, bprime, 10, {20, 20}, 1);
  ASSERT_EQ(set.profiles.size(), 250u);
  std::stringstream ss;
  write_profiles(set, ss);
  EXPECT_EQ(read_profiles(ss), set);
}

TEST(ProfileIo, RoundTripOfRandomSets) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto set = random_set(rng, 1 + trial % 9);
    std::stringstream ss;
    write_profiles(set, ss);
    EXPECT_EQ(read_profiles(ss), set) << "trial " << trial;
  }
}

TEST(ProfileIo, ErrorsCarryLineNumbers) {
  const std::string header = "run_id,beta_cache,beta_bw,t_ms,instr,cache_req,cache_miss\n";
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream is(text);
    try {
      read_profiles(is, Budget{20, 20});
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of(header + "r0,1,1,0,10,3,1\nr0,1,1,abc,10,3,1\n"), 3u);
  EXPECT_EQ(line_of(header + "r0,1,1,0,10,3\n"), 2u);
  EXPECT_EQ(line_of(header + "r0,1,1,0,10,3,1\nr0,1,1,10,10,3,1\nr0,1,1,25,10,3,1\n"), 4u);
  EXPECT_EQ(line_of(header + "r0,21,1,0,10,3,1\n"), 2u);
  EXPECT_EQ(line_of(header + "r0,1,1,0,10,3,5\n"), 2u);
  EXPECT_EQ(line_of("run,b\n"), 1u);
}

TEST(GroundTruthIo, JsonRoundTrip) {
  const auto spec = four_phase_spec(0.05);
  const auto back = ground_truth_spec_from_json(ground_truth_spec_to_json(spec));
  EXPECT_EQ(back.name, spec.name);
  EXPECT_EQ(back.noise_level, spec.noise_level);
  ASSERT_EQ(back.phases.size(), spec.phases.size());
  for (std::size_t i = 0; i < spec.phases.size(); ++i) {
    EXPECT_EQ(back.phases[i].instructions, spec.phases[i].instructions);
    EXPECT_EQ(back.phases[i].base_rate, spec.phases[i].base_rate);
    EXPECT_EQ(back.phases[i].cache_coef, spec.phases[i].cache_coef);
    EXPECT_EQ(back.phases[i].miss_ratio, spec.phases[i].miss_ratio);
  }
}
