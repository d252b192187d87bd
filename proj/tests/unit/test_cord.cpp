#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "cordkit/cord/schedule_io.hpp"
#include "cordkit/cord/scheduler.hpp"
#include "cordkit/taskgen/generate.hpp"
#include "support/sched_fixtures.hpp"

using namespace cordkit;
using namespace cordkit::cord;
using cordkit::test::bank_of;
using cordkit::test::dag;
using cordkit::test::flat;
using cordkit::test::taskset_of;

namespace {

constexpr Tick kSec = kTicksPerSecond;

PhaseModel step_model(std::vector<std::pair<std::int64_t, double>> spans) {
  PhaseModel m;
  m.workload = "w";
  std::int64_t pos = 0;
  int j = 0;
  for (auto [len, rate] : spans) {
    m.phases.push_back({pos, pos + len, rate, j++, {}, {}});
    pos += len;
  }
  return m;
}

// Integrates the rate function in 0.1 ms steps: boosted model until
// boost_seconds, base model afterwards. A step that crosses a phase
// boundary or the budget switch is split there. Returns seconds to maxIns.
double integrate_finish(const PhaseModel& boosted, const PhaseModel& base, double ins, double boost_seconds) {
  const double dt = 1e-4;
  const double max = static_cast<double>(base.max_ins());
  double t = 0.0;
  while (ins < max) {
    double left = dt;
    while (left > 0.0 && ins < max) {
      const bool boosting = t < boost_seconds;
      const auto& m = boosting ? boosted : base;
      const auto& ph = m.lookup(ins);
      double h = std::min(left, (static_cast<double>(ph.end) - ins) / ph.rate);
      if (boosting) h = std::min(h, boost_seconds - t);
      h = std::max(h, 1e-12);
      ins += ph.rate * h;
      t += h;
      left -= h;
    }
  }
  return t;
}

Platform platform(int cores, Budget max) {
  Platform p;
  p.cores = cores;
  p.max_budget = max;
  return p;
}

// Scheduler state with the given jobs ready at t = 0 and initial
// completion estimates at their base budgets.
CordState ready_state(const Taskset& ts, const ModelTable& mt, const Platform& pf, std::vector<int> ready,
                      Tick t_next, BaseMode mode = BaseMode::Greedy) {
  auto st = make_state(ts, anchors(ts), mt, pf, mode);
  for (auto& s : st.jobs) s.c = s.r + mt.wcet(s.workload, s.base);
  st.ready = std::move(ready);
  st.t = 0;
  st.t_next = t_next;
  get_sched_tasks(st);
  return st;
}

}  // namespace

// ---- compute_ins / get_finish_time ----------------------------------------

TEST(ComputeIns, ZeroDurationKeepsCount) {
  const auto m = step_model({{1000, 100.0}, {1000, 50.0}});
  EXPECT_EQ(compute_ins(m, 123.0, 5 * kSec, 5 * kSec), 123.0);
}

TEST(ComputeIns, SinglePhaseIsLinearUntilCap) {
  const auto m = step_model({{100000, 1000.0}});
  EXPECT_NEAR(compute_ins(m, 500.0, 0, 3 * kSec), 3500.0, 1e-9);
  EXPECT_EQ(compute_ins(m, 500.0, 0, 1000 * kSec), 100000.0);
}

TEST(ComputeIns, RoundTripWithFinishTime) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> rate(50.0, 5000.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = step_model({{40000, rate(rng)}, {25000, rate(rng)}, {60000, rate(rng)}});
    const double ins = std::uniform_real_distribution<double>(0.0, 120000.0)(rng);
    const Tick t = 1234;
    const Tick c = get_finish_time(m, m, ins, t, kTickInfinity);
    EXPECT_EQ(compute_ins(m, ins, t, c), static_cast<double>(m.max_ins()));
    EXPECT_LT(compute_ins(m, ins, t, c - 1), static_cast<double>(m.max_ins()));
  }
}

TEST(GetFinishTime, SinglePhaseAtBase) {
  const auto bank = bank_of({flat("a", 1'000'000, 1000)}, {2, 2});
  const auto& m = bank.at("a", {1, 1});  // 1e5 instructions per second
  EXPECT_EQ(get_finish_time(m, m, 0.0, kSec, 7 * kSec), 11 * kSec);
}

TEST(GetFinishTime, BoostUntilNextThenBase) {
  const auto bank = bank_of({flat("a", 1'000'000, 1000, 1000)}, {2, 2});
  const auto& base = bank.at("a", {1, 1});
  const auto& boosted = bank.at("a", {2, 1});  // twice the base rate
  // 2 s at 2e5/s retires 4e5; the remaining 6e5 take 6 s at 1e5/s.
  EXPECT_EQ(get_finish_time(boosted, base, 0.0, 0, 2 * kSec), 8 * kSec);
  // Finishing inside the boost window never touches the base model.
  EXPECT_EQ(get_finish_time(boosted, base, 0.0, 0, 20 * kSec), 5 * kSec);
}

TEST(GetFinishTime, MatchesFineStepIntegration) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rate(2e4, 2e5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto base = step_model({{30000, rate(rng)}, {50000, rate(rng)}, {20000, rate(rng)}, {40000, rate(rng)}});
    auto boosted = base;
    for (auto& p : boosted.phases) p.rate *= std::uniform_real_distribution<double>(1.0, 3.0)(rng);
    const double ins = std::uniform_real_distribution<double>(0.0, 100000.0)(rng);
    const Tick t = 500 * kSec / 1000;
    const Tick t_next = t + std::uniform_int_distribution<Tick>(1000, 800000)(rng);
    const Tick c = get_finish_time(boosted, base, ins, t, t_next);
    const double oracle = integrate_finish(boosted, base, ins, ticks_to_seconds(t_next - t));
    EXPECT_NEAR(ticks_to_seconds(c - t), oracle, 2e-4) << "trial " << trial;
  }
}

TEST(GetFinishTime, FinishedSubtaskIsACallerBug) {
  const auto m = step_model({{1000, 100.0}});
  EXPECT_THROW(get_finish_time(m, m, 1000.0, 0, 10), std::logic_error);
}

// ---- base allocation --------------------------------------------------------

TEST(BaseAlloc, GreedyChainReleasesAtPredecessorDeadline) {
  const Budget max{4, 4};
  const auto bank = bank_of({flat("a", 100000, 1000, 10, 10), flat("b", 300000, 2000, 10, 10)}, max);
  const ModelTable mt(bank, max);
  const auto ts = taskset_of({dag({"a", "b"}, {{0, 1}}, 100 * kSec)});
  const auto st = make_state(ts, anchors(ts), mt, platform(2, max), BaseMode::Greedy);
  ASSERT_EQ(st.jobs.size(), 2u);
  const Tick ea = bank.wcet("a", {1, 1});
  EXPECT_EQ(st.jobs[0].r, 0);
  EXPECT_EQ(st.jobs[0].d, ea);
  EXPECT_EQ(st.jobs[1].r, ea);
  EXPECT_EQ(st.jobs[1].d, ea + bank.wcet("b", {1, 1}));
  EXPECT_EQ(st.jobs[1].base, (Budget{1, 1}));
}

TEST(BaseAlloc, DeadlineAwareWithoutSlackTakesMaximum) {
  const Budget max{5, 5};
  const auto bank = bank_of({flat("a", 1'000'000, 1000, 100, 80)}, max);
  const ModelTable mt(bank, max);
  const auto ts = taskset_of({dag({"a"}, {}, bank.wcet("a", max))});
  BaseAllocResult res;
  const auto st = make_state(ts, anchors(ts), mt, platform(1, max), BaseMode::DeadlineAware, &res);
  EXPECT_TRUE(res.feasible);
  EXPECT_EQ(st.jobs[0].base, max);
}

TEST(BaseAlloc, DeadlineAwareMatchesExhaustiveSearch) {
  const Budget max{6, 6};
  const auto bank = bank_of({flat("lin", 1'000'000, 1000, 1000, 0)}, max);
  const ModelTable mt(bank, max);
  const Tick deadline = 2 * bank.wcet("lin", max);
  const auto ts = taskset_of({dag({"lin"}, {}, deadline)});
  const auto st = make_state(ts, anchors(ts), mt, platform(1, max), BaseMode::DeadlineAware);
  // Oracle: fewest partitions meeting the deadline, ties lexicographic.
  std::optional<Budget> best;
  for (const auto& b : full_budget_grid(max))
    if (bank.wcet("lin", b) <= deadline && (!best || b.cache + b.bw < best->cache + best->bw)) best = b;
  ASSERT_TRUE(best);
  EXPECT_EQ(st.jobs[0].base, *best);
  EXPECT_EQ(st.jobs[0].base, (Budget{3, 1}));
}

TEST(BaseAlloc, DeadlineAwareInfeasibleIsFlagged) {
  const Budget max{3, 3};
  const auto bank = bank_of({flat("a", 1'000'000, 1000, 100, 100)}, max);
  const ModelTable mt(bank, max);
  const auto ts = taskset_of({dag({"a"}, {}, bank.wcet("a", max) - 1)});
  BaseAllocResult res;
  make_state(ts, anchors(ts), mt, platform(1, max), BaseMode::DeadlineAware, &res);
  EXPECT_FALSE(res.feasible);
  ASSERT_EQ(res.infeasible.size(), 1u);
  EXPECT_EQ(res.infeasible[0], "t0_k1_v0");
  const auto r = cord_schedule(ts, bank, platform(1, max));
  EXPECT_FALSE(r.schedulable);
  EXPECT_NE(r.diagnostic.find("infeasible"), std::string::npos);
}

TEST(BaseAlloc, ProportionalWindowsForkJoin) {
  // a -> {b, c} -> d with WCETs 1, 2, 6, 1: the longest path is a-c-d (8).
  auto task = dag({"a", "b", "c", "d"}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, 16);
  const auto w = proportional_windows(task, {1, 2, 6, 1});
  // Shares: a 16/8 = 2, b 16*2/4 = 8, c 16*6/8 = 12, d 2.
  EXPECT_EQ(w[0].release, 0);
  EXPECT_EQ(w[0].deadline, 2);
  EXPECT_EQ(w[1].release, 2);
  EXPECT_EQ(w[1].deadline, 10);
  EXPECT_EQ(w[2].release, 2);
  EXPECT_EQ(w[2].deadline, 14);
  EXPECT_EQ(w[3].release, 14);
  EXPECT_EQ(w[3].deadline, 16);
}

// ---- resource_alloc ---------------------------------------------------------

TEST(ResourceAlloc, ZeroGainGivesNothing) {
  const Budget max{4, 4};
  const auto bank = bank_of({flat("z", 100000, 1000)}, max);
  const ModelTable mt(bank, max);
  const auto ts = taskset_of({dag({"z"}, {}, 100 * kSec), dag({"z"}, {}, 100 * kSec)});
  const auto st = ready_state(ts, mt, platform(1, max), {0, 1}, kSec / 2);
  EXPECT_FALSE(resource_alloc(st).has_value());
}

TEST(ResourceAlloc, PrefersTheLargerDelta) {
  const Budget max{2, 2};
  auto bank = bank_of({flat("d", 100000, 1000)}, max);
  bank.at("d", {1, 1}).phases[0].delta = {5.0, 1.0};
  const ModelTable mt(bank, max);
  const auto ts = taskset_of({dag({"d"}, {}, 100 * kSec)});
  const auto st = ready_state(ts, mt, platform(1, max), {0}, kSec / 2);
  const auto g = resource_alloc(st);
  ASSERT_TRUE(g);
  EXPECT_EQ(*g, (Grant{0, {1, 0}}));
}

TEST(ResourceAlloc, MatchesBruteForceWeightedSums) {
  const Budget max{6, 6};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> delta(-2.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto bank = bank_of({test::workload("p", {{40000, 1000, 0, 0}, {30000, 3000, 0, 0}, {50000, 2000, 0, 0}}),
                         test::workload("q", {{20000, 2500, 0, 0}, {70000, 1500, 0, 0}})},
                        max);
    for (const auto& w : {"p", "q"})
      for (auto& p : bank.at(w, {1, 1}).phases) p.delta = {delta(rng), delta(rng)};
    const ModelTable mt(bank, max);
    const auto ts = taskset_of({dag({"p"}, {}, 100 * kSec), dag({"q"}, {}, 100 * kSec)});
    const Tick t_next = std::uniform_int_distribution<Tick>(50000, 600000)(rng);
    auto st = ready_state(ts, mt, platform(2, max), {0, 1}, t_next);
    st.jobs[0].ins = std::uniform_real_distribution<double>(0.0, 60000.0)(rng);
    st.jobs[1].ins = std::uniform_real_distribution<double>(0.0, 40000.0)(rng);

    // Oracle: step time in 1 us increments, crediting the best positive
    // delta of the phase the instruction pointer sits in.
    double best_gain = 0.0;
    int best_job = -1, best_type = -1;
    for (int i = 0; i < 2; ++i) {
      const auto& m = bank.at(i == 0 ? "p" : "q", {1, 1});
      double ins = st.jobs[static_cast<std::size_t>(i)].ins, gain = 0.0;
      double pref[2] = {0.0, 0.0};
      for (Tick k = 0; k < t_next && ins < static_cast<double>(m.max_ins()); ++k) {
        const auto& ph = m.lookup(ins);
        const double step = std::min(ph.rate * 1e-6, static_cast<double>(m.max_ins()) - ins);
        const int tb = *ph.delta[1] > *ph.delta[0] ? 1 : 0;
        if (*ph.delta[static_cast<std::size_t>(tb)] > 0) {
          gain += *ph.delta[static_cast<std::size_t>(tb)] * step;
          pref[tb] += step;
        }
        ins += step;
      }
      const auto est = estimate_gain(st, i, {true, true});
      EXPECT_NEAR(est.weighted, gain, 1e-6 * std::abs(gain) + 30.0) << "trial " << trial << " job " << i;
      if (gain > best_gain) best_gain = gain, best_job = i, best_type = pref[1] > pref[0] ? 1 : 0;
    }
    const auto g = resource_alloc(st);
    if (best_job < 0) {
      EXPECT_FALSE(g.has_value());
    } else {
      ASSERT_TRUE(g) << "trial " << trial;
      EXPECT_EQ(g->subtask, best_job) << "trial " << trial;
      EXPECT_EQ(g->delta, unit_budget(best_type)) << "trial " << trial;
    }
  }
}

TEST(ResourceAlloc, SkipsTypesThatAreExhausted) {
  const Budget max{2, 4};
  const auto bank = bank_of({flat("c", 100000, 1000, 500, 10)}, max);
  const ModelTable mt(bank, max);
  const auto ts = taskset_of({dag({"c"}, {}, 100 * kSec), dag({"c"}, {}, 100 * kSec)});
  auto st = ready_state(ts, mt, platform(2, max), {0, 1}, kSec / 2);
  ASSERT_EQ(st.used, (Budget{2, 2}));
  const auto g = resource_alloc(st);
  ASSERT_TRUE(g);
  EXPECT_EQ(g->delta, (Budget{0, 1}));
}

// ---- max_slack_task ---------------------------------------------------------

TEST(MaxSlackTask, PicksMostSlack) {
  const Budget max{4, 4};
  const auto bank = bank_of({flat("s", 100000, 1000, 100, 50)}, max);
  const ModelTable mt(bank, max);
  const auto ts = taskset_of({dag({"s"}, {}, 100 * kSec), dag({"s"}, {}, 100 * kSec)});
  auto st = ready_state(ts, mt, platform(2, max), {0, 1}, kSec);
  for (auto& s : st.jobs) s.beta = {3, 3};
  st.used = st.budget_sum(st.scheduled);
  st.jobs[0].c = 10, st.jobs[0].d = 15;  // slack 5
  st.jobs[1].c = 10, st.jobs[1].d = 11;  // slack 1
  const auto g = max_slack_task(st);
  EXPECT_EQ(g.subtask, 0);
  EXPECT_EQ(g.delta, (Budget{0, 1}));  // bandwidth matters less for this workload
}

TEST(MaxSlackTask, OnlyOversubscribedTypeIsShed) {
  const Budget max{4, 4};
  const auto bank = bank_of({flat("s", 100000, 1000, 10, 500)}, max);
  const ModelTable mt(bank, max);
  const auto ts = taskset_of({dag({"s"}, {}, 100 * kSec), dag({"s"}, {}, 100 * kSec)});
  auto st = ready_state(ts, mt, platform(2, max), {0, 1}, kSec);
  for (auto& s : st.jobs) s.beta = {2, 3};
  st.used = st.budget_sum(st.scheduled);
  EXPECT_EQ(max_slack_task(st).delta, (Budget{0, 1}));
}

TEST(MaxSlackTask, MatchesOneStepExhaustiveLookahead) {
  const Budget max{8, 8};
  const auto bank = bank_of({flat("x", 200000, 1000, 300, 20), flat("y", 200000, 1500, 30, 250)}, max);
  const ModelTable mt(bank, max);
  const auto ts = taskset_of({dag({"x"}, {}, 100 * kSec), dag({"y"}, {}, 100 * kSec), dag({"x"}, {}, 100 * kSec)});
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    auto st = ready_state(ts, mt, platform(3, max), {0, 1, 2}, kSec);
    for (auto& s : st.jobs) {
      s.beta = {uniform_int(rng, 1, 5), uniform_int(rng, 1, 5)};
      s.d = s.c + uniform_int(rng, 0, 1000);
    }
    st.used = st.budget_sum(st.scheduled);
    if (!exceeds(st.used, max)) continue;
    // Oracle: among jobs that can shed an over-subscribed type, the most
    // slack; then the type whose removal costs the least WCET.
    int job = -1;
    for (int i = 0; i < 3; ++i) {
      const auto& s = st.jobs[static_cast<std::size_t>(i)];
      bool ok = false;
      for (int t = 0; t < 2; ++t) ok = ok || (st.used[t] > max[t] && s.beta[t] > 1);
      if (ok && (job < 0 || s.d - s.c > st.jobs[static_cast<std::size_t>(job)].d - st.jobs[static_cast<std::size_t>(job)].c))
        job = i;
    }
    ASSERT_GE(job, 0);
    const auto& s = st.jobs[static_cast<std::size_t>(job)];
    const auto& w = mt.workload_name(s.workload);
    double best = std::numeric_limits<double>::infinity();
    int type = -1;
    for (int t = 0; t < 2; ++t) {
      if (!(st.used[t] > max[t] && s.beta[t] > 1)) continue;
      const double e = bank.at(w, s.beta - unit_budget(t)).wcet_seconds();
      if (e < best) best = e, type = t;
    }
    const auto g = max_slack_task(st);
    EXPECT_EQ(g.subtask, job) << "trial " << trial;
    EXPECT_EQ(g.delta, unit_budget(type)) << "trial " << trial;
  }
}

// ---- release_successors / reset_segment ------------------------------------

class Diamond : public ::testing::Test {
 protected:
  Budget max{4, 4};
  phase::ModelBank bank = bank_of({flat("a", 100000, 1000)}, max);
  ModelTable mt{bank, max};
  Taskset ts = taskset_of({dag({"a", "a", "a", "a"}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, 100 * kSec)});
  CordState st = make_state(ts, anchors(ts), mt, platform(2, max), BaseMode::Greedy);
};

TEST_F(Diamond, SinkReleasesNothing) {
  for (auto& s : st.jobs) s.done = true;
  EXPECT_TRUE(release_successors(st, 3).empty());
}

TEST_F(Diamond, JoinWaitsForAllParents) {
  st.jobs[0].done = st.jobs[1].done = true;
  st.jobs[1].c = 7 * kSec;
  EXPECT_TRUE(release_successors(st, 1).empty());
}

TEST_F(Diamond, JoinReleasedAtLastParentCompletion) {
  st.jobs[0].done = st.jobs[1].done = st.jobs[2].done = true;
  st.jobs[1].c = 3 * kSec;
  st.jobs[2].c = 4 * kSec;
  const auto r = release_successors(st, 2);
  ASSERT_EQ(r, std::vector<int>{3});
  EXPECT_EQ(st.jobs[3].r, 4 * kSec);
  EXPECT_EQ(st.jobs[3].c, 4 * kSec + bank.wcet("a", {1, 1}));
}

TEST(ResetSegment, SingleReadyJobKeepsItsBoost) {
  const Budget max{4, 4};
  const auto bank = bank_of({flat("a", 100000, 1000, 100, 100)}, max);
  const ModelTable mt(bank, max);
  const auto ts = taskset_of({dag({"a"}, {}, 100 * kSec)});
  auto st = ready_state(ts, mt, platform(1, max), {0}, kSec);
  st.jobs[0].beta = {3, 2};
  st.jobs[0].d = 5;
  reset_segment(st, 0);
  EXPECT_EQ(st.jobs[0].beta, (Budget{3, 2}));
  EXPECT_EQ(st.jobs[0].d, 5);
  EXPECT_EQ(st.scheduled, std::vector<int>{0});
  EXPECT_EQ(st.used, (Budget{3, 2}));
}

TEST(ResetSegment, OthersReturnToBaseAndInitialDeadline) {
  const Budget max{6, 6};
  const auto bank = bank_of({flat("a", 100000, 1000, 100, 100)}, max);
  const ModelTable mt(bank, max);
  const auto ts = taskset_of({dag({"a"}, {}, 100 * kSec), dag({"a"}, {}, 100 * kSec), dag({"a"}, {}, 100 * kSec)});
  auto st = ready_state(ts, mt, platform(2, max), {0, 1, 2}, 20 * kSec);
  st.jobs[0].d_init = 5 * kSec, st.jobs[1].d_init = 3 * kSec, st.jobs[2].d_init = 4 * kSec;
  // Boosts shrank job 0's deadline to 2 s and job 1's to 2.5 s.
  st.jobs[0].beta = {3, 3}, st.jobs[0].d = 2 * kSec;
  st.jobs[1].beta = {2, 2}, st.jobs[1].d = 2500 * kSec / 1000;
  st.jobs[2].d = 4 * kSec;
  reset_segment(st, 0);
  EXPECT_EQ(st.jobs[0].beta, (Budget{3, 3}));
  EXPECT_EQ(st.jobs[1].beta, (Budget{1, 1}));
  EXPECT_EQ(st.jobs[1].d, 3 * kSec);
  EXPECT_EQ(st.jobs[1].c, bank.wcet("a", {1, 1}));
  // Deadlines now 2, 3, 4 s: the two earliest form S.
  EXPECT_EQ(st.scheduled, (std::vector<int>{0, 1}));
  EXPECT_EQ(st.used, (Budget{4, 4}));
}

// ---- cord_schedule ----------------------------------------------------------

TEST(CordSchedule, SingleSubtaskGrowsToMaximum) {
  const Budget max{4, 4};
  const auto bank = bank_of({flat("g", 1'000'000, 1000, 100, 50)}, max);
  const auto ts = taskset_of({dag({"g"}, {}, 100 * kSec)});
  const auto r = cord_schedule(ts, bank, platform(1, max), {BaseMode::Greedy});
  ASSERT_EQ(r.segments.size(), 1u);
  EXPECT_EQ(r.segments[0].start, 0);
  EXPECT_EQ(r.segments[0].end, bank.wcet("g", max));
  ASSERT_EQ(r.segments[0].entries.size(), 1u);
  EXPECT_EQ(r.segments[0].entries[0].budget, max);
  EXPECT_TRUE(r.schedulable);
}

TEST(CordSchedule, StopsGrowingWhenGainIsZero) {
  const Budget max{4, 4};
  const auto bank = bank_of({flat("g", 1'000'000, 1000, 100, 0)}, max);
  const auto ts = taskset_of({dag({"g"}, {}, 100 * kSec)});
  const auto r = cord_schedule(ts, bank, platform(1, max), {BaseMode::Greedy});
  ASSERT_EQ(r.segments.size(), 1u);
  EXPECT_EQ(r.segments[0].entries[0].budget, (Budget{4, 1}));
  EXPECT_EQ(r.segments[0].end, bank.wcet("g", {4, 1}));
}

TEST(CordSchedule, FlatWorkloadStaysAtBase) {
  const Budget max{4, 4};
  const auto bank = bank_of({flat("g", 1'000'000, 1000)}, max);
  const auto ts = taskset_of({dag({"g"}, {}, 100 * kSec)});
  const auto r = cord_schedule(ts, bank, platform(1, max), {BaseMode::Greedy});
  ASSERT_EQ(r.segments.size(), 1u);
  EXPECT_EQ(r.segments[0].entries[0].budget, (Budget{1, 1}));
  EXPECT_EQ(r.segments[0].end, 10 * kSec);
}

TEST(CordSchedule, TwoIndependentSubtasksOnOneCore) {
  const Budget max{1, 1};
  const auto bank = bank_of({flat("a", 50000, 1000)}, max);  // 0.5 s each
  const auto ts = taskset_of({dag({"a"}, {}, 4 * kSec), dag({"a"}, {}, 2 * kSec)});
  const auto r = cord_schedule(ts, bank, platform(1, max), {BaseMode::DeadlineAware});
  const Tick h = kSec / 2;
  // Jobs: 0 = t0_k1, 1 = t1_k1, 2 = t1_k2 released at 2 s.
  const std::vector<Segment> expect{{0, h, {{1, {1, 1}}}},
                                    {h, 2 * h, {{0, {1, 1}}}},
                                    {2 * h, 4 * h, {}},
                                    {4 * h, 5 * h, {{2, {1, 1}}}}};
  EXPECT_EQ(r.segments, expect);
  EXPECT_EQ(r.jobs[0].c, r.jobs[1].c + bank.wcet("a", max));
  EXPECT_TRUE(r.schedulable);
}

TEST(CordSchedule, OverloadIsUnschedulable) {
  const Budget max{1, 1};
  const auto bank = bank_of({flat("a", 50000, 1000)}, max);
  const auto ts = taskset_of({dag({"a"}, {}, kSec / 2), dag({"a"}, {}, kSec / 2)});
  const auto r = cord_schedule(ts, bank, platform(1, max), {BaseMode::DeadlineAware});
  EXPECT_TRUE(r.complete);
  EXPECT_FALSE(r.schedulable);
  EXPECT_EQ(r.diagnostic, "deadline miss");
}

TEST(CordSchedule, EmptyTasksetIsSchedulable) {
  const auto bank = test::catalog_bank();
  const auto r = cord_schedule(Taskset{}, bank, Platform{});
  EXPECT_TRUE(r.schedulable);
  EXPECT_TRUE(r.segments.empty());
}

TEST(CordSchedule, RejectsInvalidPlatform) {
  const auto bank = bank_of({flat("a", 50000, 1000)}, {2, 2});
  EXPECT_THROW(cord_schedule(Taskset{}, bank, platform(3, {2, 2})), std::invalid_argument);
}

// Random tasksets through the full scheduler, both base modes.
class CordFuzz : public ::testing::TestWithParam<BaseMode> {};

TEST_P(CordFuzz, ScheduleInvariants) {
  const auto bank = test::catalog_bank();
  const Platform pf;
  const ModelTable mt(bank, pf.max_budget);
  for (int k = 0; k < 25; ++k) {
    TasksetConfig cfg;
    cfg.utilization = 0.4 + 0.15 * k;
    cfg.seed = derive_seed(77, {static_cast<std::uint64_t>(k)});
    const auto ts = gen_taskset(cfg, bank);
    const auto r = cord_schedule(ts, mt, pf, {GetParam()});
    if (!r.diagnostic.empty() && r.diagnostic.find("infeasible") != std::string::npos) continue;
    ASSERT_TRUE(r.complete) << "taskset " << k << ": " << r.diagnostic;
    EXPECT_EQ(r.shrink_anomalies, 0) << "taskset " << k;
    Tick prev_end = 0;
    std::vector<Tick> first_start(r.jobs.size(), -1);
    for (const auto& seg : r.segments) {
      EXPECT_EQ(seg.start, prev_end);
      EXPECT_LT(seg.start, seg.end);
      prev_end = seg.end;
      EXPECT_LE(static_cast<int>(seg.entries.size()), pf.cores);
      Budget sum{0, 0};
      for (const auto& e : seg.entries) {
        sum += e.budget;
        EXPECT_TRUE(fits_within(kMinBudget, e.budget));
        auto& f = first_start[static_cast<std::size_t>(e.subtask)];
        if (f < 0) f = seg.start;
      }
      EXPECT_TRUE(fits_within(sum, pf.max_budget)) << "segment at " << seg.start;
    }
    for (std::size_t i = 0; i < r.jobs.size(); ++i) {
      const auto& s = r.jobs[i];
      EXPECT_TRUE(s.done);
      EXPECT_EQ(s.ins, s.max_ins);
      EXPECT_GE(first_start[i], s.anchor);
      for (int p : s.preds) EXPECT_GE(first_start[i], r.jobs[static_cast<std::size_t>(p)].c) << s.id;
    }
    bool met = true;
    for (const auto& s : r.jobs) met = met && s.c <= s.abs_deadline;
    EXPECT_EQ(r.schedulable, met);
  }
}

TEST_P(CordFuzz, Deterministic) {
  const auto bank = test::catalog_bank();
  TasksetConfig cfg;
  cfg.utilization = 2.0;
  cfg.seed = 4242;
  const auto ts = gen_taskset(cfg, bank);
  const auto a = cord_schedule(ts, bank, Platform{}, {GetParam()});
  const auto b = cord_schedule(ts, bank, Platform{}, {GetParam()});
  EXPECT_EQ(a.segments, b.segments);
  std::stringstream sa, sb;
  write_schedule(a, sa);
  write_schedule(b, sb);
  EXPECT_EQ(sa.str(), sb.str());
}

INSTANTIATE_TEST_SUITE_P(Modes, CordFuzz, ::testing::Values(BaseMode::Greedy, BaseMode::DeadlineAware),
                         [](const auto& info) { return info.param == BaseMode::Greedy ? "Greedy" : "DeadlineAware"; });

// ---- schedule I/O -----------------------------------------------------------

TEST(ScheduleIo, RoundTripAndIdleSentinel) {
  const Budget max{1, 1};
  const auto bank = bank_of({flat("a", 50000, 1000)}, max);
  const auto ts = taskset_of({dag({"a"}, {}, 4 * kSec), dag({"a"}, {}, 2 * kSec)});
  const auto r = cord_schedule(ts, bank, platform(1, max), {BaseMode::DeadlineAware});
  const auto rows = schedule_rows(r);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].subtask, "t1_k1_v0");
  EXPECT_EQ(rows[2].subtask, kIdleId);
  EXPECT_EQ(rows[3].start, 2 * kSec);
  const auto rep = report_from_json(report_to_json(make_report(r, "cord-da")));
  EXPECT_TRUE(rep.schedulable);
  ASSERT_EQ(rep.subtasks.size(), 3u);
  EXPECT_EQ(rep.subtasks[0].completion, std::optional<Tick>(kSec));
}

TEST(ScheduleIo, BadRowsReportLine) {
  std::stringstream ss(std::string(kScheduleHeader) + "\n0,10,t0_k1_v0,1,1\n10,5,t0_k1_v0,1,1\n");
  try {
    read_schedule(ss);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}
