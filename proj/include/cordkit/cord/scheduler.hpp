#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cordkit/cord/base_alloc.hpp"
#include "cordkit/cord/exec.hpp"
#include "cordkit/cord/instance.hpp"

namespace cordkit::cord {

struct SegmentEntry {
  int subtask = 0;  // index into the job list
  Budget budget;
  bool operator==(const SegmentEntry&) const = default;
};

/// Allocation in force over [start, end). An empty entry list is idle time.
struct Segment {
  Tick start = 0;
  Tick end = 0;
  std::vector<SegmentEntry> entries;
  bool operator==(const Segment&) const = default;
};

struct GainEstimate {
  double weighted = 0.0;
  std::array<double, kResourceTypes> preferred{};
};

/// Mutable scheduler state shared by the helper steps.
struct CordState {
  const ModelTable* models = nullptr;
  Platform platform;
  BaseMode mode = BaseMode::DeadlineAware;
  std::vector<SubtaskInstance> jobs;
  std::vector<int> ready;      // Q, ascending index
  std::vector<int> scheduled;  // S, ascending index
  Budget used{0, 0};           // R_s
  Tick t = 0;
  Tick t_next = 0;

  // Memo of the last gain estimate per job; valid while (t, t_next,
  // budget, allowed types) are unchanged since Ins only moves with t.
  struct GainMemo {
    Tick t = -1, t_next = -1;
    Budget beta{0, 0};
    int allowed = -1;
    GainEstimate gain;
  };
  mutable std::vector<GainMemo> memo;

  SubtaskInstance& job(int i) { return jobs[static_cast<std::size_t>(i)]; }
  const SubtaskInstance& job(int i) const { return jobs[static_cast<std::size_t>(i)]; }
  const PhaseModel& model(int i, const Budget& b) const { return models->model(job(i).workload, b); }
  bool is_scheduled(int i) const { return std::binary_search(scheduled.begin(), scheduled.end(), i); }

  /// Completion estimate for job i holding `b` until `until`, then its base.
  Tick finish_time(int i, const Budget& b, Tick from, Tick until) const {
    const auto& s = job(i);
    return get_finish_time(model(i, b), model(i, s.base), s.ins, from, until);
  }

  Budget budget_sum(const std::vector<int>& set) const {
    Budget sum{0, 0};
    for (int i : set) sum += job(i).beta;
    return sum;
  }
};

/// S = the m ready jobs with the smallest deadlines (ties: lowest index).
inline void get_sched_tasks(CordState& st) {
  auto& q = st.scheduled;
  q = st.ready;
  const auto m = std::min(q.size(), static_cast<std::size_t>(st.platform.cores));
  auto earlier = [&](int a, int b) { return st.job(a).d != st.job(b).d ? st.job(a).d < st.job(b).d : a < b; };
  if (m < q.size()) std::nth_element(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(m), q.end(), earlier);
  q.resize(m);
  std::sort(q.begin(), q.end());
  st.used = st.budget_sum(st.scheduled);
}

struct Grant {
  int subtask = 0;
  Budget delta;
  bool operator==(const Grant&) const = default;
};

/// Instruction-weighted gain of one more partition for job i over the
/// phases it crosses before t_next, restricted to the allowed types.
/// Also reports how many instructions each type was the best choice for.
inline GainEstimate estimate_gain(const CordState& st, int i, const std::array<bool, kResourceTypes>& allowed) {
  GainEstimate g;
  const auto& s = st.job(i);
  const auto& m = st.model(i, s.beta);
  const double until = compute_ins(m, s.ins, st.t, st.t_next);
  for (std::size_t j = m.phase_index(s.ins); j < m.phases.size(); ++j) {
    const auto& p = m.phases[j];
    if (static_cast<double>(p.start) >= until) break;
    const double span = std::min(until, static_cast<double>(p.end)) - std::max(s.ins, static_cast<double>(p.start));
    if (span <= 0.0) continue;
    int best = -1;
    for (int t = 0; t < kResourceTypes; ++t) {
      const auto& d = p.delta[static_cast<std::size_t>(t)];
      if (!allowed[static_cast<std::size_t>(t)] || !d) continue;
      if (best < 0 || *d > *p.delta[static_cast<std::size_t>(best)]) best = t;
    }
    if (best < 0) continue;
    const double gain = *p.delta[static_cast<std::size_t>(best)];
    if (gain <= 0.0) continue;
    g.weighted += gain * span;
    g.preferred[static_cast<std::size_t>(best)] += span;
  }
  return g;
}

/// Picks the ready job with the largest weighted gain and the partition
/// type it benefits from most. Only types S leaves free are considered,
/// for scheduled and unscheduled jobs alike.
inline std::optional<Grant> resource_alloc(const CordState& st) {
  const Budget& cap = st.platform.max_budget;
  Budget avail = cap - st.used;
  avail.cache = std::max(avail.cache, 0);
  avail.bw = std::max(avail.bw, 0);
  std::optional<Grant> best;
  double best_gain = 0.0;
  for (int i : st.ready) {
    const auto& s = st.job(i);
    const bool in_s = st.is_scheduled(i);
    if (!in_s && s.beta == cap) continue;
    if (in_s && avail == Budget{0, 0}) continue;
    std::array<bool, kResourceTypes> allowed{};
    for (int t = 0; t < kResourceTypes; ++t)
      allowed[static_cast<std::size_t>(t)] = s.beta[t] < cap[t] && avail[t] > 0;
    const int key = int(allowed[0]) | (int(allowed[1]) << 1);
    if (st.memo.size() != st.jobs.size()) st.memo.assign(st.jobs.size(), {});
    auto& mm = st.memo[static_cast<std::size_t>(i)];
    if (mm.t != st.t || mm.t_next != st.t_next || mm.beta != s.beta || mm.allowed != key)
      mm = {st.t, st.t_next, s.beta, key, estimate_gain(st, i, allowed)};
    const auto& g = mm.gain;
    if (g.weighted > best_gain) {
      best_gain = g.weighted;
      const int type = g.preferred[1] > g.preferred[0] ? 1 : 0;
      best = Grant{i, unit_budget(type)};
    }
  }
  return best;
}

/// Job in S with the most slack d - c that can give up a partition of an
/// over-subscribed type, and the type whose loss costs it the least WCET.
inline Grant max_slack_task(const CordState& st) {
  const Budget& cap = st.platform.max_budget;
  auto can_shed = [&](int i, int t) { return st.used[t] > cap[t] && st.job(i).beta[t] > 1; };
  int pick = -1;
  for (int i : st.scheduled) {
    if (!can_shed(i, 0) && !can_shed(i, 1)) continue;
    if (pick < 0 || st.job(i).d - st.job(i).c > st.job(pick).d - st.job(pick).c) pick = i;
  }
  if (pick < 0) throw std::logic_error("over-subscribed with every scheduled subtask at the minimum budget");
  const auto& s = st.job(pick);
  int type = -1;
  double best = 0.0;
  for (int t = 0; t < kResourceTypes; ++t) {
    if (!can_shed(pick, t)) continue;
    const double e = st.model(pick, s.beta - unit_budget(t)).wcet_seconds();
    if (type < 0 || e < best) type = t, best = e;
  }
  return {pick, unit_budget(type)};
}

/// Takes partitions away from S until its total fits the platform.
inline void shed_excess(CordState& st) {
  while (exceeds(st.used, st.platform.max_budget)) {
    const auto g = max_slack_task(st);
    auto& s = st.job(g.subtask);
    s.beta -= g.delta;
    st.used -= g.delta;
    s.c = st.finish_time(g.subtask, s.beta, st.t, st.t_next);
  }
}

/// Successors of finished job i whose predecessors are all done; each is
/// released at i's completion.
inline std::vector<int> release_successors(CordState& st, int i) {
  std::vector<int> out;
  const Tick c = st.job(i).c;
  for (int q : st.job(i).succs) {
    auto& s = st.job(q);
    bool all = true;
    for (int p : s.preds) all = all && st.job(p).done;
    if (!all) continue;
    s.r = c;
    s.c = s.r + st.models->wcet(s.workload, s.base);
    // The greedy rule ties the deadline to the release; re-derive it so a
    // late release never leaves d < r.
    if (st.mode == BaseMode::Greedy) s.d = s.c;
    out.push_back(q);
  }
  return out;
}

/// Returns every ready job other than `keep` to its base budget and
/// pre-boost deadline, then recomputes S.
inline void reset_segment(CordState& st, int keep) {
  for (int i : st.ready) {
    if (i == keep) continue;
    auto& s = st.job(i);
    s.beta = s.base;
    s.d = s.d_init;
    s.c = st.finish_time(i, s.base, st.t, kTickInfinity);
  }
  get_sched_tasks(st);
}

struct CordOptions {
  BaseMode mode = BaseMode::DeadlineAware;
  int horizon_factor = 4;  // give up once time passes this many hyper-periods
};

struct CordResult {
  std::vector<SubtaskInstance> jobs;
  std::vector<Segment> segments;
  Tick hyperperiod = 0;
  bool schedulable = false;
  bool complete = false;  // every job finished
  std::string diagnostic;
  int guard_trips = 0;
  int shrink_anomalies = 0;  // deadline shrinks that raised c or pushed d below r
  std::size_t decision_points = 0;
};

/// Jobs of one hyper-period with base allocation applied; nothing ready yet.
inline CordState make_state(const Taskset& ts, const AnchorSet& a, const ModelTable& models, const Platform& platform,
                            BaseMode mode, BaseAllocResult* base = nullptr) {
  CordState st;
  st.models = &models;
  st.platform = platform;
  st.mode = mode;
  st.jobs = expand_jobs(ts, a, models);
  const auto b = base_alloc(st.jobs, ts, models, mode);
  if (base) *base = b;
  return st;
}

namespace detail {

// 64-bit fingerprint of (S, budgets of Q, t_next) for the repeat check.
inline std::uint64_t step2_state(const CordState& st) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0x100000001b3ULL;
  };
  mix(static_cast<std::uint64_t>(st.t_next));
  for (int i : st.scheduled) mix(static_cast<std::uint64_t>(i));
  mix(~0ULL);
  for (int i : st.ready) mix((static_cast<std::uint64_t>(st.job(i).beta.cache) << 16) | static_cast<std::uint64_t>(st.job(i).beta.bw));
  return h;
}

inline void insert_sorted(std::vector<int>& v, int x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); }

}  // namespace detail

/// Builds the static schedule of one hyper-period by co-allocating budgets
/// and deadlines at every decision point.
inline CordResult cord_schedule(const Taskset& ts, const ModelTable& models, const Platform& platform,
                                const CordOptions& opt = {}) {
  if (!platform.valid()) throw std::invalid_argument("platform cannot give every core the minimum budget");
  if (platform.max_budget != models.max_budget()) throw std::invalid_argument("model table does not match the platform");
  CordResult res;
  const auto anchor_set = anchors(ts);
  res.hyperperiod = anchor_set.hyperperiod;

  BaseAllocResult base;
  CordState st = make_state(ts, anchor_set, models, platform, opt.mode, &base);
  if (!base.feasible) {
    res.jobs = std::move(st.jobs);
    res.diagnostic = "deadline-aware base allocation infeasible for " + base.infeasible.front();
    return res;
  }
  if (st.jobs.empty()) {
    res.schedulable = res.complete = true;
    return res;
  }

  // Initialization.
  std::set<Tick> pending;  // B: anchors still to be reached
  for (const auto& v : anchor_set.per_task)
    for (Tick a : v)
      if (a > 0) pending.insert(a);
  st.t_next = kTickInfinity;
  for (std::size_t i = 0; i < st.jobs.size(); ++i) {
    auto& s = st.jobs[i];
    s.c = s.r + models.wcet(s.workload, s.base);
    if (s.r > 0) st.t_next = std::min(st.t_next, s.r);
    if (s.c > 0) st.t_next = std::min(st.t_next, s.c);
    if (s.anchor == 0 && s.is_source()) st.ready.push_back(static_cast<int>(i));
  }
  st.t = 0;
  const Tick horizon = res.hyperperiod * opt.horizon_factor;
  std::vector<std::uint64_t> seen;  // sorted fingerprints of Step 2 states

  for (;;) {
    ++res.decision_points;
    // Step 1: base budgets, pick S, shed down to the platform limit.
    for (int i : st.ready) {
      auto& s = st.job(i);
      s.d_init = s.d;
      s.beta = s.base;
    }
    get_sched_tasks(st);
    shed_excess(st);

    // Step 2: grow budgets while it helps, shrinking deadlines to match.
    const std::size_t cap = 10 * st.ready.size() * static_cast<std::size_t>(platform.max_budget.cache + platform.max_budget.bw);
    seen.assign(1, detail::step2_state(st));
    for (std::size_t iter = 0;; ++iter) {
      if (iter >= cap) {
        ++res.guard_trips;
        break;
      }
      const auto grant = resource_alloc(st);
      if (!grant) break;
      const int i = grant->subtask;
      auto& s = st.job(i);
      s.beta += grant->delta;
      if (st.is_scheduled(i)) st.used += grant->delta;
      const Tick finish = st.finish_time(i, s.beta, st.t, st.t_next);
      if (finish > s.c || s.d - (s.c - finish) < s.r) ++res.shrink_anomalies;
      s.d -= s.c - finish;
      s.c = finish;
      if (!st.is_scheduled(i) && !st.scheduled.empty()) {
        int latest = st.scheduled.front();
        for (int j : st.scheduled)
          if (st.job(j).d > st.job(latest).d) latest = j;
        if (s.d < st.job(latest).d && fits_within(st.used - st.job(latest).beta + s.beta, platform.max_budget)) {
          st.scheduled.erase(std::find(st.scheduled.begin(), st.scheduled.end(), latest));
          detail::insert_sorted(st.scheduled, i);
          st.used = st.budget_sum(st.scheduled);
        }
      }
      if (s.c >= st.t_next) {
        get_sched_tasks(st);
      } else {
        reset_segment(st, i);
        st.t_next = s.c;
      }
      const auto key = detail::step2_state(st);
      const auto pos = std::lower_bound(seen.begin(), seen.end(), key);
      if (pos != seen.end() && *pos == key) {
        ++res.guard_trips;
        break;
      }
      seen.insert(pos, key);
    }
    shed_excess(st);

    // Step 3: settle the segment [t, t_next).
    Segment seg{st.t, st.t_next, {}};
    std::vector<int> finished, released;
    for (int i : st.ready) {
      auto& s = st.job(i);
      if (!st.is_scheduled(i)) {
        s.beta = s.base;
        s.d = s.d_init;
        s.c = st.finish_time(i, s.base, st.t_next, kTickInfinity);
        continue;
      }
      seg.entries.push_back({i, s.beta});
      s.ins = compute_ins(st.model(i, s.beta), s.ins, st.t, st.t_next);
      if (s.ins >= s.max_ins - kDoneTolerance) {
        s.ins = s.max_ins;
        s.c = st.t_next;
        s.done = true;
        finished.push_back(i);
      }
    }
    for (int i : finished) {
      st.ready.erase(std::find(st.ready.begin(), st.ready.end(), i));
      for (int q : release_successors(st, i))
        if (std::find(released.begin(), released.end(), q) == released.end()) released.push_back(q);
    }
    for (int q : released) detail::insert_sorted(st.ready, q);
    res.segments.push_back(std::move(seg));

    if (st.ready.empty() && pending.empty()) {
      res.complete = true;
      break;
    }
    const Tick end = st.t_next;
    st.t = st.ready.empty() ? *pending.begin() : st.t_next;
    if (st.t > end) res.segments.push_back({end, st.t, {}});
    for (std::size_t i = 0; i < st.jobs.size(); ++i) {
      const auto& s = st.jobs[i];
      if (s.anchor == st.t && s.is_source() && !s.done && st.t > 0) detail::insert_sorted(st.ready, static_cast<int>(i));
    }
    pending.erase(st.t);
    st.t_next = pending.empty() ? kTickInfinity : *pending.begin();
    for (int i : st.ready) st.t_next = std::min(st.t_next, st.job(i).c);
    if (st.t > horizon) {
      res.diagnostic = "time passed " + std::to_string(opt.horizon_factor) + " hyper-periods";
      break;
    }
  }

  res.schedulable = res.complete;
  for (const auto& s : st.jobs)
    if (!s.done || s.c > s.abs_deadline) res.schedulable = false;
  if (res.complete && !res.schedulable && res.diagnostic.empty()) res.diagnostic = "deadline miss";
  res.jobs = std::move(st.jobs);
  return res;
}

inline CordResult cord_schedule(const Taskset& ts, const phase::ModelBank& bank, const Platform& platform,
                                const CordOptions& opt = {}) {
  const ModelTable models(bank, platform.max_budget);
  return cord_schedule(ts, models, platform, opt);
}

}  // namespace cordkit::cord
