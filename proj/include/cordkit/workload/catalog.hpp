#pragma once

#include <vector>

#include "cordkit/workload/ground_truth.hpp"

namespace cordkit {

// Built-in synthetic workloads used when no workload file is given. They
// span bandwidth-bound, cache-bound, mixed and resource-insensitive
// behaviour. Rates are instructions per 10 ms interval.
inline std::vector<GroundTruthSpec> default_workload_specs() {
  auto spec = [](const char* name, std::vector<PhaseDescriptor> phases) {
    GroundTruthSpec s;
    s.name = name;
    s.phases = std::move(phases);
    s.noise_level = 0.05;
    return s;
  };
  return {
      spec("stream", {{300000, 2000, 20, 150, 0.4, 0.5}, {200000, 3000, 50, 100, 0.3, 0.3}, {300000, 1500, 10, 200, 0.5, 0.6}}),
      spec("cachey", {{250000, 2500, 200, 20, 0.5, 0.2}, {250000, 2000, 300, 30, 0.6, 0.25}, {200000, 4000, 100, 10, 0.3, 0.1}}),
      spec("balanced", {{400000, 3000, 100, 100, 0.4, 0.3}, {300000, 2500, 120, 80, 0.4, 0.2}}),
      spec("compute", {{500000, 6000, 10, 5, 0.1, 0.05}, {200000, 5000, 30, 20, 0.2, 0.1}}),
  };
}

inline std::vector<GroundTruthWorkload> default_workloads() {
  std::vector<GroundTruthWorkload> out;
  for (const auto& s : default_workload_specs()) out.push_back(make_ground_truth(s));
  return out;
}

}  // namespace cordkit
