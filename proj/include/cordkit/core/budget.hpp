#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cordkit {

/// Number of partitions of each shared resource type held by one subtask.
struct Budget {
  int cache = 1;
  int bw = 1;

  constexpr auto operator<=>(const Budget&) const = default;

  constexpr Budget& operator+=(const Budget& o) {
    cache += o.cache;
    bw += o.bw;
    return *this;
  }
  constexpr Budget& operator-=(const Budget& o) {
    cache -= o.cache;
    bw -= o.bw;
    return *this;
  }
  friend constexpr Budget operator+(Budget a, const Budget& b) { return a += b; }
  friend constexpr Budget operator-(Budget a, const Budget& b) { return a -= b; }

  constexpr int operator[](int type) const { return type == 0 ? cache : bw; }
  constexpr int& operator[](int type) { return type == 0 ? cache : bw; }

  std::string str() const { return "(" + std::to_string(cache) + "," + std::to_string(bw) + ")"; }
};

inline std::ostream& operator<<(std::ostream& os, const Budget& b) { return os << b.str(); }

inline constexpr int kResourceTypes = 2;
inline constexpr Budget kMinBudget{1, 1};

/// Unit increment of a single resource type (0 = cache, 1 = bandwidth).
constexpr Budget unit_budget(int type) { return type == 0 ? Budget{1, 0} : Budget{0, 1}; }

/// Componentwise a <= b.
constexpr bool fits_within(const Budget& a, const Budget& b) { return a.cache <= b.cache && a.bw <= b.bw; }

/// True when any component of a exceeds the corresponding component of b.
constexpr bool exceeds(const Budget& a, const Budget& b) { return !fits_within(a, b); }

/// Every budget in [1..max.cache] x [1..max.bw], cache-major.
inline std::vector<Budget> full_budget_grid(const Budget& max) {
  std::vector<Budget> out;
  out.reserve(static_cast<std::size_t>(max.cache * max.bw));
  for (int c = 1; c <= max.cache; ++c)
    for (int b = 1; b <= max.bw; ++b) out.push_back({c, b});
  return out;
}

/// Shared-resource platform: m identical cores plus partition counts.
struct Platform {
  int cores = 4;
  Budget max_budget{20, 20};

  /// Every scheduled subtask must be able to hold the minimum budget.
  bool valid() const {
    return cores >= 1 && max_budget.cache >= cores && max_budget.bw >= cores;
  }
  /// Static even split used as the reference allocation, floored.
  Budget even_split() const { return {max_budget.cache / cores, max_budget.bw / cores}; }
};

/// Parses "CACHE,BW".
inline Budget parse_budget(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument("");
    std::size_t used = 0;
    Budget b{std::stoi(text.substr(0, comma), &used), 0};
    if (used != comma) throw std::invalid_argument("");
    b.bw = std::stoi(text.substr(comma + 1), &used);
    if (used != text.size() - comma - 1) throw std::invalid_argument("");
    return b;
  } catch (const std::exception&) {
    throw std::invalid_argument("budget '" + text + "' is not CACHE,BW");
  }
}

inline std::string budget_text(const Budget& b) { return std::to_string(b.cache) + "," + std::to_string(b.bw); }

}  // namespace cordkit

template <>
struct std::hash<cordkit::Budget> {
  std::size_t operator()(const cordkit::Budget& b) const noexcept {
    return std::hash<std::int64_t>{}((static_cast<std::int64_t>(b.cache) << 32) ^ b.bw);
  }
};
