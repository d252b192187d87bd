#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "cordkit/baseline/decomp.hpp"
#include "cordkit/cord/scheduler.hpp"
#include "cordkit/phase/bank.hpp"
#include "cordkit/taskgen/generate.hpp"
#include "cordkit/workload/catalog.hpp"

namespace cordkit::harness {

enum class Mode { CordGreedy, CordDa, CordGen, Decomp };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::CordGreedy: return "cord-greedy";
    case Mode::CordDa: return "cord-da";
    case Mode::CordGen: return "cord-gen";
    case Mode::Decomp: return "decomp";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::CordGreedy, Mode::CordDa, Mode::CordGen, Mode::Decomp})
    if (s == mode_name(m)) return m;
  throw std::invalid_argument("unknown mode '" + s + "' (cord-greedy, cord-da, cord-gen, decomp)");
}

struct ExperimentConfig {
  int cores = 4;
  Budget max_budget{20, 20};
  std::vector<double> edge_probabilities{0.5};
  double u_start = 0.2, u_stop = 5.0, u_step = 0.2;
  int tasksets_per_step = 200;
  int tasks = 5;
  int min_depth = 3, max_depth = 8, max_width = 4;
  std::uint64_t seed = 1;
  std::vector<Mode> modes{Mode::CordGreedy, Mode::CordDa, Mode::Decomp};
  std::string bank;             // phase-model bank CSV; empty = built-in synthetic workloads
  std::string generative_bank;  // required by cord-gen
  bool wall_timing = true;      // false writes zero runtimes so reruns are byte-identical
  int threads = 0;              // 0 = hardware concurrency

  Platform platform() const { return {cores, max_budget}; }

  void validate() const {
    if (!platform().valid()) throw std::invalid_argument("platform cannot give every core the minimum budget");
    if (!(u_step > 0.0)) throw std::invalid_argument("utilization step must be positive");
    if (u_stop < u_start) throw std::invalid_argument("utilization stop below start");
    if (u_start < 0.0) throw std::invalid_argument("utilization must be non-negative");
    if (u_stop > tasks) throw std::invalid_argument("utilization beyond the task count");
    if (tasksets_per_step < 1) throw std::invalid_argument("need at least one taskset per step");
    if (edge_probabilities.empty()) throw std::invalid_argument("no edge probabilities");
    if (modes.empty()) throw std::invalid_argument("no modes");
    for (double p : edge_probabilities)
      if (p < 0.0 || p > 1.0) throw std::invalid_argument("edge probability outside [0,1]");
    taskset_config(0.0, 0.0, 0).validate();
  }

  std::vector<double> utilizations() const {
    const auto n = static_cast<int>(std::floor((u_stop - u_start) / u_step + 1e-9)) + 1;
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(std::round((u_start + i * u_step) * 1e9) / 1e9);
    return out;
  }

  TasksetConfig taskset_config(double p, double u, std::uint64_t taskset_seed) const {
    TasksetConfig c;
    c.tasks = tasks;
    c.edge_probability = p;
    c.min_depth = min_depth;
    c.max_depth = max_depth;
    c.max_width = max_width;
    c.utilization = u;
    c.seed = taskset_seed;
    c.reference_budget = platform().even_split();
    return c;
  }
};

// Experiment config (JSON), keys as the CLI long flags:
//   {"cores": 4, "max-budget": "20,20", "p": [0.25, 0.5, 0.75],
//    "u-start": 0.2, "u-stop": 5.0, "u-step": 0.4, "tasksets": 20, "tasks": 5,
//    "min-depth": 3, "max-depth": 8, "max-width": 4, "seed": 1,
//    "modes": ["cord-greedy", "cord-da", "decomp"], "bank": "", "generative-bank": "",
//    "timing": "wall", "threads": 0}
// Missing keys keep their defaults.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"cores", "max-budget", "p", "u-start", "u-stop", "u-step",
                                           "tasksets", "tasks", "min-depth", "max-depth", "max-width", "seed",
                                           "modes", "bank", "generative-bank", "timing", "threads"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw std::invalid_argument("unknown experiment key '" + k + "'");
  ExperimentConfig c;
  c.cores = j.value("cores", c.cores);
  if (j.contains("max-budget")) c.max_budget = parse_budget(j["max-budget"].get<std::string>());
  if (j.contains("p")) c.edge_probabilities = j["p"].get<std::vector<double>>();
  c.u_start = j.value("u-start", c.u_start);
  c.u_stop = j.value("u-stop", c.u_stop);
  c.u_step = j.value("u-step", c.u_step);
  c.tasksets_per_step = j.value("tasksets", c.tasksets_per_step);
  c.tasks = j.value("tasks", c.tasks);
  c.min_depth = j.value("min-depth", c.min_depth);
  c.max_depth = j.value("max-depth", c.max_depth);
  c.max_width = j.value("max-width", c.max_width);
  c.seed = j.value("seed", c.seed);
  if (j.contains("modes")) {
    c.modes.clear();
    for (const auto& m : j["modes"]) c.modes.push_back(parse_mode(m.get<std::string>()));
  }
  c.bank = j.value("bank", c.bank);
  c.generative_bank = j.value("generative-bank", c.generative_bank);
  const auto timing = j.value("timing", std::string("wall"));
  if (timing != "wall" && timing != "none") throw std::invalid_argument("timing must be 'wall' or 'none'");
  c.wall_timing = timing == "wall";
  c.threads = j.value("threads", c.threads);
  return c;
}

inline nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
  nlohmann::json modes = nlohmann::json::array();
  for (Mode m : c.modes) modes.push_back(mode_name(m));
  return {{"cores", c.cores},
          {"max-budget", budget_text(c.max_budget)},
          {"p", c.edge_probabilities},
          {"u-start", c.u_start},
          {"u-stop", c.u_stop},
          {"u-step", c.u_step},
          {"tasksets", c.tasksets_per_step},
          {"tasks", c.tasks},
          {"min-depth", c.min_depth},
          {"max-depth", c.max_depth},
          {"max-width", c.max_width},
          {"seed", c.seed},
          {"modes", modes},
          {"bank", c.bank},
          {"generative-bank", c.generative_bank},
          {"timing", c.wall_timing ? "wall" : "none"},
          {"threads", c.threads}};
}

inline ExperimentConfig read_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return experiment_config_from_json(nlohmann::json::parse(in));
}

/// Model banks the modes run against. `synthetic` also supplies the
/// reference WCETs used to generate tasksets.
struct ExperimentBanks {
  phase::ModelBank synthetic;
  std::optional<phase::ModelBank> generative;
};

inline ExperimentBanks load_banks(const ExperimentConfig& c) {
  ExperimentBanks b;
  b.synthetic = c.bank.empty() ? phase::analytic_bank(default_workloads(), c.max_budget) : phase::read_bank(c.bank);
  if (!c.generative_bank.empty()) b.generative = phase::read_bank(c.generative_bank);
  return b;
}

/// One (mode, taskset) run.
struct RunRecord {
  Mode mode;
  int p_index = 0, u_index = 0, sample = 0;
  bool schedulable = false;
  double runtime_ms = 0.0;
  std::string diagnostic;
};

struct ResultRow {
  std::string mode;
  double p = 0.0, utilization = 0.0;
  double fraction_schedulable = 0.0;
  double mean_runtime_ms = 0.0, max_runtime_ms = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // sorted by mode, p, utilization
  std::vector<RunRecord> runs;  // ordered by p, utilization, sample, mode
  std::vector<double> utilizations;
};

inline constexpr std::string_view kResultsHeader = "mode,p,utilization,fraction_schedulable,mean_runtime_ms,max_runtime_ms";

inline void write_results(const ExperimentResult& r, std::ostream& os) {
  os << kResultsHeader << '\n';
  for (const auto& row : r.rows)
    os << row.mode << ',' << csv::format_double(row.p) << ',' << csv::format_double(row.utilization) << ','
       << csv::format_double(row.fraction_schedulable) << ',' << csv::format_double(row.mean_runtime_ms) << ','
       << csv::format_double(row.max_runtime_ms) << '\n';
}

/// Seed of the k-th taskset at sweep point (p_index, u_index).
inline std::uint64_t taskset_seed(std::uint64_t root, int p_index, int u_index, int sample) {
  return derive_seed(root, {static_cast<std::uint64_t>(p_index), static_cast<std::uint64_t>(u_index),
                            static_cast<std::uint64_t>(sample)});
}

/// Schedulability sweep. Every (p, U, k) taskset is generated once and
/// handed to each enabled mode; work items run on a thread pool and land in
/// fixed slots, so the output does not depend on the thread count.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentBanks& banks) {
  cfg.validate();
  const Platform plat = cfg.platform();
  const bool wants_gen = std::find(cfg.modes.begin(), cfg.modes.end(), Mode::CordGen) != cfg.modes.end();
  if (wants_gen && !banks.generative) throw std::invalid_argument("mode cord-gen needs a generative bank");

  const cord::ModelTable synthetic(banks.synthetic, plat.max_budget);
  for (const auto& w : banks.synthetic.workloads()) synthetic.require_complete(synthetic.workload_index(w));
  std::optional<cord::ModelTable> generative;
  if (wants_gen) {
    generative.emplace(*banks.generative, plat.max_budget);
    for (const auto& w : banks.synthetic.workloads()) generative->require_complete(generative->workload_index(w));
  }

  ExperimentResult res;
  res.utilizations = cfg.utilizations();
  const int n_p = static_cast<int>(cfg.edge_probabilities.size());
  const int n_u = static_cast<int>(res.utilizations.size());
  const int n_k = cfg.tasksets_per_step;
  const int n_m = static_cast<int>(cfg.modes.size());
  const std::size_t items = static_cast<std::size_t>(n_p) * n_u * n_k;
  res.runs.resize(items * static_cast<std::size_t>(n_m));

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::string first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t item = next.fetch_add(1);
      if (item >= items) return;
      const int k = static_cast<int>(item % static_cast<std::size_t>(n_k));
      const int ui = static_cast<int>(item / static_cast<std::size_t>(n_k) % static_cast<std::size_t>(n_u));
      const int pi = static_cast<int>(item / (static_cast<std::size_t>(n_k) * static_cast<std::size_t>(n_u)));
      try {
        const auto ts = gen_taskset(cfg.taskset_config(cfg.edge_probabilities[static_cast<std::size_t>(pi)],
                                                       res.utilizations[static_cast<std::size_t>(ui)],
                                                       taskset_seed(cfg.seed, pi, ui, k)),
                                    banks.synthetic);
        for (int mi = 0; mi < n_m; ++mi) {
          RunRecord rec{cfg.modes[static_cast<std::size_t>(mi)], pi, ui, k, false, 0.0, {}};
          const auto t0 = std::chrono::steady_clock::now();
          switch (rec.mode) {
            case Mode::Decomp: rec.schedulable = baseline::decomp_schedulable(ts, plat, synthetic); break;
            case Mode::CordGreedy:
            case Mode::CordDa:
            case Mode::CordGen: {
              cord::CordOptions opt;
              opt.mode = rec.mode == Mode::CordGreedy ? cord::BaseMode::Greedy : cord::BaseMode::DeadlineAware;
              const auto r = cord::cord_schedule(ts, rec.mode == Mode::CordGen ? *generative : synthetic, plat, opt);
              rec.schedulable = r.schedulable;
              rec.diagnostic = r.diagnostic;
              break;
            }
          }
          const auto t1 = std::chrono::steady_clock::now();
          if (cfg.wall_timing) rec.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
          res.runs[item * static_cast<std::size_t>(n_m) + static_cast<std::size_t>(mi)] = std::move(rec);
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mu);
        if (first_error.empty())
          first_error = "p index " + std::to_string(pi) + ", U index " + std::to_string(ui) + ", taskset " +
                        std::to_string(k) + ": " + e.what();
        next.store(items);
        return;
      }
    }
  };
  const int threads = std::max(1, cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (int i = 0; i < std::min<int>(threads, static_cast<int>(std::max<std::size_t>(items, 1))); ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!first_error.empty()) throw std::runtime_error(first_error);

  for (int mi = 0; mi < n_m; ++mi)
    for (int pi = 0; pi < n_p; ++pi)
      for (int ui = 0; ui < n_u; ++ui) {
        ResultRow row{mode_name(cfg.modes[static_cast<std::size_t>(mi)]), cfg.edge_probabilities[static_cast<std::size_t>(pi)],
                      res.utilizations[static_cast<std::size_t>(ui)], 0.0, 0.0, 0.0};
        int ok = 0;
        for (int k = 0; k < n_k; ++k) {
          const std::size_t item = (static_cast<std::size_t>(pi) * n_u + static_cast<std::size_t>(ui)) * n_k + static_cast<std::size_t>(k);
          const auto& rec = res.runs[item * static_cast<std::size_t>(n_m) + static_cast<std::size_t>(mi)];
          ok += rec.schedulable ? 1 : 0;
          row.mean_runtime_ms += rec.runtime_ms;
          row.max_runtime_ms = std::max(row.max_runtime_ms, rec.runtime_ms);
        }
        row.fraction_schedulable = static_cast<double>(ok) / n_k;
        row.mean_runtime_ms /= n_k;
        res.rows.push_back(std::move(row));
      }
  std::sort(res.rows.begin(), res.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.mode, a.p, a.utilization) < std::tie(b.mode, b.p, b.utilization);
  });
  return res;
}

}  // namespace cordkit::harness
