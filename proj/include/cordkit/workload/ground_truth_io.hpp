#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cordkit/workload/ground_truth.hpp"

namespace cordkit {

// Ground-truth workload file (JSON):
//
//   {
//     "name": "stream",            workload name
//     "interval_ms": 10,           sampling interval
//     "noise_level": 0.05,         relative std-dev of multiplicative noise
//     "phases": [
//       {"instructions": 2000000,  span of the phase
//        "base_rate": 20000,       instructions per interval at budget (1,1)
//        "cache_coef": 400,        extra instructions per interval per cache partition
//        "bw_coef": 150,           extra instructions per interval per bandwidth partition
//        "req_ratio": 0.3,         cache requests per instruction
//        "miss_ratio": 0.1}        misses per cache request
//     ]
//   }
//
// A file may also hold {"workloads": [ ... ]} with several such objects.

inline GroundTruthSpec ground_truth_spec_from_json(const nlohmann::json& j) {
  GroundTruthSpec spec;
  spec.name = j.value("name", std::string("workload"));
  spec.interval_ms = j.value("interval_ms", kDefaultIntervalMs);
  spec.noise_level = j.value("noise_level", 0.0);
  for (const auto& p : j.at("phases")) {
    PhaseDescriptor d;
    d.instructions = p.at("instructions").get<std::int64_t>();
    d.base_rate = p.at("base_rate").get<double>();
    d.cache_coef = p.value("cache_coef", 0.0);
    d.bw_coef = p.value("bw_coef", 0.0);
    d.req_ratio = p.value("req_ratio", d.req_ratio);
    d.miss_ratio = p.value("miss_ratio", d.miss_ratio);
    spec.phases.push_back(d);
  }
  return spec;
}

inline nlohmann::json ground_truth_spec_to_json(const GroundTruthSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["interval_ms"] = spec.interval_ms;
  j["noise_level"] = spec.noise_level;
  j["phases"] = nlohmann::json::array();
  for (const auto& d : spec.phases)
    j["phases"].push_back({{"instructions", d.instructions},
                           {"base_rate", d.base_rate},
                           {"cache_coef", d.cache_coef},
                           {"bw_coef", d.bw_coef},
                           {"req_ratio", d.req_ratio},
                           {"miss_ratio", d.miss_ratio}});
  return j;
}

inline std::vector<GroundTruthSpec> ground_truth_specs_from_json(const nlohmann::json& j) {
  std::vector<GroundTruthSpec> out;
  if (j.contains("workloads")) {
    for (const auto& w : j.at("workloads")) out.push_back(ground_truth_spec_from_json(w));
  } else {
    out.push_back(ground_truth_spec_from_json(j));
  }
  return out;
}

inline std::vector<GroundTruthSpec> read_ground_truth_specs(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return ground_truth_specs_from_json(nlohmann::json::parse(is));
}

}  // namespace cordkit
