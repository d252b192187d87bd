#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cordkit {

using Rng = std::mt19937_64;

/// Derives an independent child seed from a root seed and a path of indices
/// (splitmix64 mixing), so parallel work items get reproducible streams.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t s = mix(root);
  for (auto p : path) s = mix(s ^ mix(p + 0x632be59bd9b4e019ULL));
  return s;
}

/// Uniform double in [0, 1) from the top 53 bits; independent of the
/// standard library's distribution implementations.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

}  // namespace cordkit
