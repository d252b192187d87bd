#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cordkit/cord/schedule_io.hpp"
#include "cordkit/genprof/pipeline.hpp"
#include "cordkit/harness/experiment.hpp"
#include "cordkit/harness/validate.hpp"
#include "cordkit/phase/bank.hpp"
#include "cordkit/taskgen/generate.hpp"
#include "cordkit/workload/catalog.hpp"
#include "cordkit/workload/ground_truth_io.hpp"
#include "cordkit/workload/profile_io.hpp"

using namespace cordkit;
using nlohmann::json;

namespace {

// JSON config file. Nested objects name subcommands ({"cord": {"run": {...}}});
// leaves are long flag names. Flags on the command line win.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> out;
    collect(j, {}, out);
    return out;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config values must be scalars or arrays of scalars");
  }

  static void collect(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, v] : j.items()) {
      if (v.is_object()) {
        auto next = parents;
        next.push_back(key);
        collect(v, next, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (v.is_array())
        for (const auto& x : v) item.inputs.push_back(scalar(x));
      else
        item.inputs.push_back(scalar(v));
      out.push_back(std::move(item));
    }
  }
};

std::ofstream open_out(const std::string& path) {
  if (auto dir = std::filesystem::path(path).parent_path(); !dir.empty()) std::filesystem::create_directories(dir);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

void write_json(const json& j, const std::string& path) { open_out(path) << j.dump(2) << '\n'; }

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

std::vector<Budget> parse_budgets(const std::vector<std::string>& items) {
  std::vector<Budget> out;
  for (const auto& s : items) out.push_back(parse_budget(s));
  return out;
}

/// Every (a, b) with a and b drawn from the level list, clipped to the grid.
std::vector<Budget> level_grid(const std::vector<int>& levels, const Budget& max) {
  std::vector<Budget> out;
  for (int c : levels)
    for (int b : levels)
      if (c >= 1 && b >= 1 && c <= max.cache && b <= max.bw) out.push_back({c, b});
  return out;
}

phase::ModelBank load_bank(const std::string& path, const Budget& max) {
  return path.empty() ? phase::analytic_bank(default_workloads(), max) : phase::read_bank(path);
}

// ---- workload synth ---------------------------------------------------------

struct SynthArgs {
  std::string spec, workload, out, out_dir;
  std::vector<int> levels{1, 5, 10, 15, 20};
  std::vector<std::string> budgets;
  std::string grid_max = "20,20";
  int runs = 3;
  std::uint64_t seed = 1;
};

void run_synth(const SynthArgs& a) {
  const auto specs = a.spec.empty() ? default_workload_specs() : read_ground_truth_specs(a.spec);
  const Budget max = parse_budget(a.grid_max);
  const auto budgets = a.budgets.empty() ? level_grid(a.levels, max) : parse_budgets(a.budgets);
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (a.workload.empty() || specs[i].name == a.workload) chosen.push_back(i);
  if (chosen.empty()) throw std::invalid_argument("no workload named '" + a.workload + "'");
  if (a.out_dir.empty() && chosen.size() != 1)
    throw std::invalid_argument("several workloads: pick one with --workload or write them with --out-dir");
  for (auto i : chosen) {
    const auto set = sample_profile_set(make_ground_truth(specs[i]), budgets, a.runs, max,
                                        derive_seed(a.seed, {static_cast<std::uint64_t>(i)}));
    const auto path = a.out_dir.empty() ? a.out : (std::filesystem::path(a.out_dir) / (specs[i].name + ".csv")).string();
    auto os = open_out(path);
    write_profiles(set, os);
    std::cerr << specs[i].name << ": " << set.profiles.size() << " runs -> " << path << '\n';
  }
}

// ---- profile-gen ------------------------------------------------------------

struct ProfileGenArgs {
  std::string profiles, out, weights_out, weights_budget;
  std::vector<std::string> budgets, trained;
  std::string mode = "ml";
  double epsilon = 0.0;  // 0 = solver default
  double tol = 1e-8;
  int max_iter = 5000;
  double bandwidth = 1.0;
  double beta_weight = 10.0;
  double spacing = genprof::kDefaultSnapshotSpacing;
  int interval_ms = kDefaultIntervalMs;
  bool verbose = false;
};

void run_profile_gen(const ProfileGenArgs& a) {
  const auto set = read_profiles(a.profiles);
  genprof::GenerativeOptions opt;
  opt.snapshot_spacing = a.spacing;
  if (!a.trained.empty()) opt.trained_budgets = parse_budgets(a.trained);
  opt.cost.beta_weight = a.beta_weight;
  if (a.epsilon > 0.0) opt.sinkhorn.epsilon = a.epsilon;
  opt.sinkhorn.tol = a.tol;
  opt.sinkhorn.max_iter = a.max_iter;
  opt.condition.bandwidth = a.bandwidth;
  opt.output_interval_ms = a.interval_ms;
  std::vector<genprof::ProfileMode> modes;
  if (a.mode == "ml" || a.mode == "both") modes.push_back(genprof::ProfileMode::MaxLikelihood);
  if (a.mode == "mean" || a.mode == "both") modes.push_back(genprof::ProfileMode::Mean);
  if (modes.empty()) throw std::invalid_argument("mode must be ml, mean or both");

  const auto model = genprof::fit_generative_model(set, opt);
  if (a.verbose)
    std::cerr << "snapshots " << model.marginals.size() << ", support " << model.solution.support_size()
              << ", epsilon " << model.solution.epsilon << ", sweeps " << model.solution.iterations << ", residual "
              << model.solution.residual << (model.solution.converged ? "" : " (not converged)") << '\n';
  const auto budgets = a.budgets.empty() ? set.budget_grid() : parse_budgets(a.budgets);
  ProfileSet out;
  out.workload = set.workload;
  out.grid_max = set.grid_max;
  for (auto mode : modes)
    for (auto& sp : genprof::synthesize(model, budgets, mode, opt)) out.profiles.push_back(std::move(sp.profile));
  auto os = open_out(a.out);
  write_profiles(out, os);

  if (!a.weights_out.empty()) {
    const auto cond = model.conditioner(opt.condition);
    const Budget b = a.weights_budget.empty() ? budgets.front() : parse_budget(a.weights_budget);
    auto ws = open_out(a.weights_out);
    genprof::write_weights_dump(ws, cond, b, genprof::output_grid_ms(cond, a.interval_ms));
  }
  std::cerr << set.workload << ": " << out.profiles.size() << " synthetic profiles -> " << a.out << '\n';
}

// ---- phase-extract ----------------------------------------------------------

struct ExtractArgs {
  std::vector<std::string> profiles;
  std::string out;
  std::uint64_t seed = 1;
  int k_min = 3, k_max = 20;
  double min_gain = 0.05;
};

void run_extract(const ExtractArgs& a) {
  phase::ExtractOptions opt;
  opt.seed = a.seed;
  opt.select.k_min = a.k_min;
  opt.select.k_max = a.k_max;
  opt.select.min_gain = a.min_gain;
  phase::ModelBank bank;
  for (const auto& path : a.profiles) {
    const auto set = read_profiles(path);
    if (!bank.all().empty() && bank.all().count(set.workload))
      throw std::invalid_argument("workload '" + set.workload + "' appears in more than one profile file");
    const auto part = phase::extract_bank(set, opt);
    for (const auto& [w, models] : part.all())
      for (const auto& [b, m] : models) bank.add(m);
    std::cerr << set.workload << ": " << bank.models_of(set.workload).size() << " budgets\n";
  }
  auto os = open_out(a.out);
  phase::write_bank(bank, os);
}

// ---- cord run ---------------------------------------------------------------

struct CordArgs {
  std::string taskset, bank, out, report;
  std::string mode = "da";
  int cores = 4;
  std::string max_budget = "20,20";
};

cord::BaseMode parse_base_mode(const std::string& s) {
  if (s == "greedy") return cord::BaseMode::Greedy;
  if (s == "da" || s == "deadline-aware") return cord::BaseMode::DeadlineAware;
  throw std::invalid_argument("mode must be greedy or da");
}

void run_cord(const CordArgs& a) {
  const Platform pf{a.cores, parse_budget(a.max_budget)};
  const auto ts = read_taskset(a.taskset);
  const auto bank = load_bank(a.bank, pf.max_budget);
  const auto mode = parse_base_mode(a.mode);
  const auto r = cord::cord_schedule(ts, bank, pf, {mode});
  {
    auto os = open_out(a.out);
    cord::write_schedule(r, os);
  }
  if (!a.report.empty()) write_json(cord::report_to_json(cord::make_report(r, cord::base_mode_name(mode))), a.report);
  std::cout << "schedulable=" << (r.schedulable ? "true" : "false") << " hyperperiod_us=" << r.hyperperiod
            << " segments=" << r.segments.size() << " subtasks=" << r.jobs.size();
  if (!r.diagnostic.empty()) std::cout << " diagnostic=\"" << r.diagnostic << '"';
  std::cout << '\n';
}

// ---- taskgen ----------------------------------------------------------------

struct TaskgenArgs {
  std::string out, out_dir, bank;
  int tasks = 5;
  double p = 0.5;
  int min_depth = 3, max_depth = 8, max_width = 4;
  double utilization = 1.0;
  double u_start = 0.2, u_stop = 5.0, u_step = 0.2;
  int count = 1;
  std::uint64_t seed = 1;
  std::string reference_budget = "5,5";
  std::string max_budget = "20,20";
};

void run_taskgen(const TaskgenArgs& a) {
  const auto bank = load_bank(a.bank, parse_budget(a.max_budget));
  TasksetConfig cfg;
  cfg.tasks = a.tasks;
  cfg.edge_probability = a.p;
  cfg.min_depth = a.min_depth;
  cfg.max_depth = a.max_depth;
  cfg.max_width = a.max_width;
  cfg.reference_budget = parse_budget(a.reference_budget);
  if (a.out_dir.empty()) {
    if (a.out.empty()) throw std::invalid_argument("give --out for one taskset or --out-dir for a sweep");
    cfg.utilization = a.utilization;
    cfg.seed = a.seed;
    write_taskset(gen_taskset(cfg, bank), a.out);
    return;
  }
  harness::ExperimentConfig sweep;
  sweep.u_start = a.u_start;
  sweep.u_stop = a.u_stop;
  sweep.u_step = a.u_step;
  const auto us = sweep.utilizations();
  std::filesystem::create_directories(a.out_dir);
  for (std::size_t ui = 0; ui < us.size(); ++ui)
    for (int k = 0; k < a.count; ++k) {
      cfg.utilization = us[ui];
      cfg.seed = harness::taskset_seed(a.seed, 0, static_cast<int>(ui), k);
      char name[64];
      std::snprintf(name, sizeof name, "u%.2f_k%03d.json", us[ui], k);
      write_taskset(gen_taskset(cfg, bank), (std::filesystem::path(a.out_dir) / name).string());
    }
  std::cerr << us.size() * static_cast<std::size_t>(a.count) << " tasksets -> " << a.out_dir << '\n';
}

// ---- experiment -------------------------------------------------------------

struct ExperimentArgs {
  harness::ExperimentConfig cfg;
  std::string max_budget = "20,20";
  std::vector<std::string> modes{"cord-greedy", "cord-da", "decomp"};
  std::string timing = "wall";
  std::string out, runs_out;
};

void run_experiment_cmd(ExperimentArgs a) {
  a.cfg.max_budget = parse_budget(a.max_budget);
  a.cfg.modes.clear();
  for (const auto& m : a.modes) a.cfg.modes.push_back(harness::parse_mode(m));
  if (a.timing != "wall" && a.timing != "none") throw std::invalid_argument("timing must be wall or none");
  a.cfg.wall_timing = a.timing == "wall";
  const auto res = harness::run_experiment(a.cfg, harness::load_banks(a.cfg));
  {
    auto os = open_out(a.out);
    harness::write_results(res, os);
  }
  if (!a.runs_out.empty()) {
    auto os = open_out(a.runs_out);
    os << "mode,p,utilization,sample,schedulable,runtime_ms,diagnostic\n";
    for (const auto& r : res.runs)
      os << harness::mode_name(r.mode) << ',' << csv::format_double(a.cfg.edge_probabilities[static_cast<std::size_t>(r.p_index)])
         << ',' << csv::format_double(res.utilizations[static_cast<std::size_t>(r.u_index)]) << ',' << r.sample << ','
         << (r.schedulable ? 1 : 0) << ',' << csv::format_double(r.runtime_ms) << ",\"" << r.diagnostic << "\"\n";
  }
  std::cerr << res.rows.size() << " rows -> " << a.out << '\n';
}

// ---- validate ---------------------------------------------------------------

struct ValidateArgs {
  std::string schedule, report, taskset, bank, out;
  int cores = 4;
  std::string max_budget = "20,20";
};

int run_validate(const ValidateArgs& a) {
  const Platform pf{a.cores, parse_budget(a.max_budget)};
  std::ifstream in(a.schedule);
  if (!in) throw std::runtime_error("cannot open " + a.schedule);
  const auto rows = cord::read_schedule(in);
  const auto report = cord::report_from_json(read_json(a.report));
  const auto ts = read_taskset(a.taskset);
  const auto v = harness::validate_schedule(rows, report, ts, load_bank(a.bank, pf.max_budget), pf);
  json j{{"pass", v.pass}, {"violations", json::array()}};
  for (const auto& x : v.violations) {
    j["violations"].push_back(
        {{"kind", harness::violation_name(x.kind)}, {"segment", x.segment}, {"subtask", x.subtask}, {"detail", x.detail}});
    std::cout << harness::violation_name(x.kind) << " segment=" << x.segment << " subtask=" << x.subtask << ": "
              << x.detail << '\n';
  }
  if (!a.out.empty()) write_json(j, a.out);
  std::cout << (v.pass ? "pass" : "fail") << " (" << v.violations.size() << " violations, " << rows.size()
            << " rows)\n";
  return v.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shared-resource-aware scheduling of DAG tasks: profiling, phase models, CORD, experiments"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config; nested objects per subcommand, keys are long flag names");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  int exit_code = 0;

  // workload synth
  auto* workload = app.add_subcommand("workload", "Ground-truth workloads");
  workload->require_subcommand(1);
  SynthArgs synth;
  auto* synth_cmd = workload->add_subcommand("synth", "Sample profile CSVs from ground-truth workloads");
  synth_cmd->add_option("--spec", synth.spec, "ground-truth JSON (default: built-in workloads)")->check(CLI::ExistingFile);
  synth_cmd->add_option("--workload", synth.workload, "only this workload");
  auto* synth_out = synth_cmd->add_option("--out", synth.out, "profile CSV for a single workload");
  auto* synth_dir = synth_cmd->add_option("--out-dir", synth.out_dir, "write <name>.csv per workload");
  synth_out->excludes(synth_dir);
  synth_cmd->add_option("--levels", synth.levels, "partition levels; budgets are their product")->capture_default_str();
  synth_cmd->add_option("--budgets", synth.budgets, "explicit budgets CACHE,BW (overrides --levels)");
  synth_cmd->add_option("--grid-max", synth.grid_max, "budget grid maximum")->capture_default_str();
  synth_cmd->add_option("--runs", synth.runs, "runs per budget")->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "root seed")->capture_default_str();
  synth_cmd->callback([&] {
    if (synth.out.empty() && synth.out_dir.empty()) throw CLI::RequiredError("--out or --out-dir");
    run_synth(synth);
  });

  // profile-gen
  ProfileGenArgs pg;
  auto* pg_cmd = app.add_subcommand("profile-gen", "Synthesize profiles at unseen budgets from measured ones");
  pg_cmd->add_option("--profiles", pg.profiles, "measured profile CSV")->required()->check(CLI::ExistingFile);
  pg_cmd->add_option("--out", pg.out, "synthetic profile CSV")->required();
  pg_cmd->add_option("--budgets", pg.budgets, "output budgets CACHE,BW (default: full grid)");
  pg_cmd->add_option("--trained", pg.trained, "budgets used for training (default: all in the file)");
  pg_cmd->add_option("--mode", pg.mode, "ml, mean or both")->capture_default_str();
  pg_cmd->add_option("--epsilon", pg.epsilon, "entropic regularization (0: 0.05 x median cost)");
  pg_cmd->add_option("--tol", pg.tol, "marginal tolerance")->capture_default_str();
  pg_cmd->add_option("--max-iter", pg.max_iter, "Sinkhorn sweep cap")->capture_default_str();
  pg_cmd->add_option("--bandwidth", pg.bandwidth, "budget kernel bandwidth, partitions")->capture_default_str();
  pg_cmd->add_option("--beta-weight", pg.beta_weight, "budget coordinate weight in the cost")->capture_default_str();
  pg_cmd->add_option("--spacing", pg.spacing, "snapshot spacing, seconds")->capture_default_str();
  pg_cmd->add_option("--interval-ms", pg.interval_ms, "output sample interval")->capture_default_str();
  pg_cmd->add_option("--weights-out", pg.weights_out, "conditional weights per time, for plotting");
  pg_cmd->add_option("--weights-budget", pg.weights_budget, "budget of the weights dump (default: first output)");
  pg_cmd->add_flag("--verbose", pg.verbose, "solver diagnostics on stderr");
  pg_cmd->callback([&] { run_profile_gen(pg); });

  // phase-extract
  ExtractArgs ex;
  auto* ex_cmd = app.add_subcommand("phase-extract", "Fit phase models to profiles and write a model bank");
  ex_cmd->add_option("--profiles", ex.profiles, "profile CSVs, one workload each")->required()->check(CLI::ExistingFile);
  ex_cmd->add_option("--out", ex.out, "model bank CSV")->required();
  ex_cmd->add_option("--seed", ex.seed, "clustering seed")->capture_default_str();
  ex_cmd->add_option("--k-min", ex.k_min, "smallest phase count tried")->capture_default_str();
  ex_cmd->add_option("--k-max", ex.k_max, "largest phase count tried")->capture_default_str();
  ex_cmd->add_option("--min-gain", ex.min_gain, "relative score gain needed for one more phase")->capture_default_str();
  ex_cmd->callback([&] { run_extract(ex); });

  // cord run
  auto* cord_cmd = app.add_subcommand("cord", "Static schedule construction");
  cord_cmd->require_subcommand(1);
  CordArgs ca;
  auto* run_cmd = cord_cmd->add_subcommand("run", "Schedule one taskset over its hyper-period");
  run_cmd->add_option("--taskset", ca.taskset, "taskset JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--bank", ca.bank, "model bank CSV (default: built-in workloads)");
  run_cmd->add_option("--mode", ca.mode, "base allocation: greedy or da")->capture_default_str();
  run_cmd->add_option("--cores", ca.cores, "core count")->capture_default_str();
  run_cmd->add_option("--max-budget", ca.max_budget, "partitions per resource")->capture_default_str();
  run_cmd->add_option("--out", ca.out, "schedule CSV")->required();
  run_cmd->add_option("--report", ca.report, "verdict and completions JSON");
  run_cmd->callback([&] { run_cord(ca); });

  // taskgen
  TaskgenArgs tg;
  auto* tg_cmd = app.add_subcommand("taskgen", "Random DAG tasksets");
  auto* tg_out = tg_cmd->add_option("--out", tg.out, "one taskset JSON at --utilization");
  auto* tg_dir = tg_cmd->add_option("--out-dir", tg.out_dir, "sweep: --count tasksets per utilization step");
  tg_out->excludes(tg_dir);
  tg_cmd->add_option("--bank", tg.bank, "model bank for reference WCETs (default: built-in)");
  tg_cmd->add_option("--tasks", tg.tasks, "tasks per taskset")->capture_default_str();
  tg_cmd->add_option("--p", tg.p, "edge probability")->capture_default_str();
  tg_cmd->add_option("--min-depth", tg.min_depth)->capture_default_str();
  tg_cmd->add_option("--max-depth", tg.max_depth)->capture_default_str();
  tg_cmd->add_option("--max-width", tg.max_width)->capture_default_str();
  tg_cmd->add_option("--utilization", tg.utilization, "total utilization (single taskset)")->capture_default_str();
  tg_cmd->add_option("--u-start", tg.u_start)->capture_default_str();
  tg_cmd->add_option("--u-stop", tg.u_stop)->capture_default_str();
  tg_cmd->add_option("--u-step", tg.u_step)->capture_default_str();
  tg_cmd->add_option("--count", tg.count, "tasksets per step")->capture_default_str();
  tg_cmd->add_option("--seed", tg.seed, "root seed")->capture_default_str();
  tg_cmd->add_option("--reference-budget", tg.reference_budget, "budget of the reference WCETs")->capture_default_str();
  tg_cmd->add_option("--max-budget", tg.max_budget, "grid of the built-in bank")->capture_default_str();
  tg_cmd->callback([&] { run_taskgen(tg); });

  // experiment
  ExperimentArgs ea;
  ea.cfg.wall_timing = true;
  auto* ex_sweep = app.add_subcommand("experiment", "Schedulability sweep; writes the results CSV");
  ex_sweep->add_option("--cores", ea.cfg.cores)->capture_default_str();
  ex_sweep->add_option("--max-budget", ea.max_budget)->capture_default_str();
  ex_sweep->add_option("--p", ea.cfg.edge_probabilities, "edge probabilities")->capture_default_str();
  ex_sweep->add_option("--u-start", ea.cfg.u_start)->capture_default_str();
  ex_sweep->add_option("--u-stop", ea.cfg.u_stop)->capture_default_str();
  ex_sweep->add_option("--u-step", ea.cfg.u_step)->capture_default_str();
  ex_sweep->add_option("--tasksets", ea.cfg.tasksets_per_step, "tasksets per step")->capture_default_str();
  ex_sweep->add_option("--tasks", ea.cfg.tasks, "tasks per taskset")->capture_default_str();
  ex_sweep->add_option("--min-depth", ea.cfg.min_depth)->capture_default_str();
  ex_sweep->add_option("--max-depth", ea.cfg.max_depth)->capture_default_str();
  ex_sweep->add_option("--max-width", ea.cfg.max_width)->capture_default_str();
  ex_sweep->add_option("--seed", ea.cfg.seed, "root seed")->capture_default_str();
  ex_sweep->add_option("--modes", ea.modes, "cord-greedy, cord-da, cord-gen, decomp")->capture_default_str();
  ex_sweep->add_option("--bank", ea.cfg.bank, "model bank CSV (default: built-in workloads)");
  ex_sweep->add_option("--generative-bank", ea.cfg.generative_bank, "model bank for cord-gen");
  ex_sweep->add_option("--timing", ea.timing, "wall or none (zero runtimes, byte-stable output)")->capture_default_str();
  ex_sweep->add_option("--threads", ea.cfg.threads, "worker threads (0: all cores)")->capture_default_str();
  ex_sweep->add_option("--out", ea.out, "results CSV")->required();
  ex_sweep->add_option("--runs-out", ea.runs_out, "per-taskset CSV");
  ex_sweep->callback([&] { run_experiment_cmd(ea); });

  // validate
  ValidateArgs va;
  auto* va_cmd = app.add_subcommand("validate", "Check a schedule against its taskset and report");
  va_cmd->add_option("--schedule", va.schedule, "schedule CSV")->required()->check(CLI::ExistingFile);
  va_cmd->add_option("--report", va.report, "report JSON from cord run")->required()->check(CLI::ExistingFile);
  va_cmd->add_option("--taskset", va.taskset, "taskset JSON")->required()->check(CLI::ExistingFile);
  va_cmd->add_option("--bank", va.bank, "model bank CSV (default: built-in workloads)");
  va_cmd->add_option("--cores", va.cores)->capture_default_str();
  va_cmd->add_option("--max-budget", va.max_budget)->capture_default_str();
  va_cmd->add_option("--out", va.out, "violations JSON");
  va_cmd->callback([&] { exit_code = run_validate(va); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return exit_code;
}
