#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cordkit/core/csv.hpp"
#include "cordkit/core/time.hpp"
#include "cordkit/phase/model.hpp"
#include "cordkit/workload/ground_truth.hpp"

namespace cordkit::phase {

/// Phase models per (workload, budget).
class ModelBank {
 public:
  void add(PhaseModel m) {
    m.validate();
    auto& slot = models_[m.workload];
    const auto b = m.budget;
    slot.insert_or_assign(b, std::move(m));
  }

  bool contains(const std::string& w, const Budget& b) const {
    const auto it = models_.find(w);
    return it != models_.end() && it->second.count(b) > 0;
  }

  const PhaseModel& at(const std::string& w, const Budget& b) const {
    const auto it = models_.find(w);
    if (it == models_.end()) throw std::out_of_range("unknown workload '" + w + "'");
    const auto jt = it->second.find(b);
    if (jt == it->second.end()) throw std::out_of_range("no model for '" + w + "' at " + b.str());
    return jt->second;
  }
  PhaseModel& at(const std::string& w, const Budget& b) {
    return const_cast<PhaseModel&>(static_cast<const ModelBank&>(*this).at(w, b));
  }

  /// Worst-case execution time, rounded up to whole ticks.
  Tick wcet(const std::string& w, const Budget& b) const { return seconds_to_ticks_ceil(at(w, b).wcet_seconds()); }

  std::vector<std::string> workloads() const {
    std::vector<std::string> out;
    for (const auto& [w, m] : models_) out.push_back(w);
    return out;
  }
  const std::map<Budget, PhaseModel>& models_of(const std::string& w) const {
    const auto it = models_.find(w);
    if (it == models_.end()) throw std::out_of_range("unknown workload '" + w + "'");
    return it->second;
  }
  const std::map<std::string, std::map<Budget, PhaseModel>>& all() const { return models_; }

  /// Every budget from (1,1) to max has a model for every workload.
  bool complete_over(const Budget& max) const {
    for (const auto& [w, ms] : models_)
      for (const auto& b : full_budget_grid(max))
        if (!ms.count(b)) return false;
    return true;
  }

  bool operator==(const ModelBank&) const = default;

 private:
  std::map<std::string, std::map<Budget, PhaseModel>> models_;
};

namespace detail {

inline double rate_at_clamped(const PhaseModel& m, double ins) {
  const double last = static_cast<double>(m.max_ins()) - 0.5;
  return m.rate_at(std::min(ins, last));
}

}  // namespace detail

/// Fills the per-phase delta tables. For a unit increase of type t the
/// entry is the mean, over every extra budget e with e_t >= 1 and
/// budget + e <= r_max (only budgets present in the bank), of the rate at
/// the phase start under budget + e minus the phase rate.
inline void build_delta_tables(ModelBank& bank, const Budget& r_max) {
  for (const auto& w : bank.workloads()) {
    const auto& models = bank.models_of(w);
    std::map<Budget, std::vector<DeltaRow>> deltas, directs;
    for (const auto& [b, m] : models) {
      auto& drows = deltas[b];
      auto& srows = directs[b];
      for (const auto& ph : m.phases) {
        DeltaRow d, s;
        for (int t = 0; t < kResourceTypes; ++t) {
          const Budget unit = unit_budget(t);
          if (models.count(b + unit))
            s[static_cast<std::size_t>(t)] =
                detail::rate_at_clamped(models.at(b + unit), static_cast<double>(ph.start)) - ph.rate;
          double sum = 0.0;
          int count = 0;
          for (int ec = unit.cache; ec <= r_max.cache - b.cache; ++ec)
            for (int eb = unit.bw; eb <= r_max.bw - b.bw; ++eb) {
              const auto it = models.find(b + Budget{ec, eb});
              if (it == models.end()) continue;
              sum += detail::rate_at_clamped(it->second, static_cast<double>(ph.start)) - ph.rate;
              ++count;
            }
          if (count > 0) d[static_cast<std::size_t>(t)] = sum / count;
        }
        drows.push_back(d);
        srows.push_back(s);
      }
    }
    for (const auto& [b, rows] : deltas) {
      auto& m = bank.at(w, b);
      for (std::size_t j = 0; j < m.phases.size(); ++j) {
        m.phases[j].delta = rows[j];
        m.phases[j].direct = directs[b][j];
      }
    }
  }
}

/// Model read straight off a ground truth: its true phases at the
/// worst-case rate the noise model allows.
inline PhaseModel analytic_model(const GroundTruthWorkload& w, const Budget& b) {
  PhaseModel m;
  m.workload = w.name();
  m.budget = b;
  int j = 0;
  for (const auto& tp : w.phases())
    m.phases.push_back({tp.start, tp.end, w.worst_case_rate_per_second(tp.start, b), j++, {}, {}});
  return m;
}

inline ModelBank analytic_bank(const std::vector<GroundTruthWorkload>& ws, const Budget& grid_max) {
  ModelBank bank;
  for (const auto& w : ws)
    for (const auto& b : full_budget_grid(grid_max)) bank.add(analytic_model(w, b));
  build_delta_tables(bank, grid_max);
  return bank;
}

/// One model per budget group of the set. All models of the workload are
/// stretched to a common instruction total: `total` if given, otherwise the
/// largest extracted total.
inline ModelBank extract_bank(const ProfileSet& set, const ExtractOptions& opt = {},
                              std::optional<std::int64_t> total = std::nullopt) {
  ModelBank bank;
  std::vector<PhaseModel> models;
  for (const auto& [b, runs] : set.by_budget()) {
    auto o = opt;
    o.seed = derive_seed(opt.seed, {static_cast<std::uint64_t>(b.cache), static_cast<std::uint64_t>(b.bw)});
    models.push_back(phase_model_from_runs(runs, set.workload, o));
  }
  std::int64_t common = 0;
  for (const auto& m : models) common = std::max(common, m.max_ins());
  if (total) common = *total;
  for (auto& m : models) {
    m.set_max_ins(common);
    bank.add(std::move(m));
  }
  build_delta_tables(bank, set.grid_max);
  return bank;
}

inline constexpr std::string_view kBankHeader =
    "workload,beta_cache,beta_bw,phase,start_instr,end_instr,rate,delta_cache,delta_bw,direct_cache,direct_bw";

namespace detail {
inline std::string opt_field(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }
inline std::optional<double> parse_opt(std::string_view s, std::size_t line, const char* field) {
  if (csv::trim(s).empty()) return std::nullopt;
  return csv::to_double(s, line, field);
}
}  // namespace detail

/// One row per phase; empty delta fields mean no admissible larger budget.
inline void write_bank(const ModelBank& bank, std::ostream& os) {
  os << kBankHeader << '\n';
  for (const auto& [w, models] : bank.all())
    for (const auto& [b, m] : models)
      for (std::size_t j = 0; j < m.phases.size(); ++j) {
        const auto& p = m.phases[j];
        os << w << ',' << b.cache << ',' << b.bw << ',' << j << ',' << p.start << ',' << p.end << ','
           << csv::format_double(p.rate) << ',' << detail::opt_field(p.delta[0]) << ','
           << detail::opt_field(p.delta[1]) << ',' << detail::opt_field(p.direct[0]) << ','
           << detail::opt_field(p.direct[1]) << '\n';
      }
}

inline void write_bank(const ModelBank& bank, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_bank(bank, os);
}

inline ModelBank read_bank(std::istream& is) {
  std::map<std::pair<std::string, Budget>, PhaseModel> models;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    const auto text = csv::trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!header) {
      if (text != kBankHeader) throw ParseError(lineno, "unexpected header '" + std::string(text) + "'");
      header = true;
      continue;
    }
    const auto f = csv::split(text);
    if (f.size() != 11) throw ParseError(lineno, "expected 11 fields, got " + std::to_string(f.size()));
    const Budget b{static_cast<int>(csv::to_int(f[1], lineno, "beta_cache")),
                   static_cast<int>(csv::to_int(f[2], lineno, "beta_bw"))};
    auto& m = models[{std::string(f[0]), b}];
    m.workload = std::string(f[0]);
    m.budget = b;
    const auto idx = csv::to_int(f[3], lineno, "phase");
    if (idx != static_cast<std::int64_t>(m.phases.size())) throw ParseError(lineno, "phase index out of order");
    Phase p;
    p.start = csv::to_int(f[4], lineno, "start_instr");
    p.end = csv::to_int(f[5], lineno, "end_instr");
    p.rate = csv::to_double(f[6], lineno, "rate");
    p.cluster = static_cast<int>(idx);
    p.delta = {detail::parse_opt(f[7], lineno, "delta_cache"), detail::parse_opt(f[8], lineno, "delta_bw")};
    p.direct = {detail::parse_opt(f[9], lineno, "direct_cache"), detail::parse_opt(f[10], lineno, "direct_bw")};
    if (p.end <= p.start || !(p.rate > 0.0)) throw ParseError(lineno, "invalid phase");
    if (!m.phases.empty() && m.phases.back().end != p.start) throw ParseError(lineno, "phases are not contiguous");
    if (m.phases.empty() && p.start != 0) throw ParseError(lineno, "first phase must start at 0");
    m.phases.push_back(p);
  }
  ModelBank bank;
  for (auto& [key, m] : models) bank.add(std::move(m));
  return bank;
}

inline ModelBank read_bank(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_bank(is);
}

}  // namespace cordkit::phase
