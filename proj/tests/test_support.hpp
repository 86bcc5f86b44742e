#pragma once

#include <random>
#include <string>
#include <vector>

#include "playtime/core_model.hpp"

namespace playtime::testing {

inline PlaytimeRecord rec(const std::string& id, const char* date, int slot, double hours) {
  return {id, *Date::parse(date), slot, hours};
}

/// Random window with a mix of empty days, empty slots and dense cells.
/// Row n always has positive mass.
inline PlayerWindow random_window(std::mt19937_64& rng, int n, const std::string& id = "u") {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double density = unit(rng);
  PlayerWindow w{id, Date::from_ymd(2018, 12, 31), PlaytimeMatrix::Zero(n, kSlotsPerDay)};
  for (int d = 0; d < n; ++d) {
    if (unit(rng) < 0.2) continue;  // idle day
    for (int r = 0; r < kSlotsPerDay; ++r) {
      if (unit(rng) < density) w.playtime(d, r) = unit(rng);
    }
  }
  w.playtime(n - 1, static_cast<int>(rng() % kSlotsPerDay)) += 0.25;
  return w;
}

/// Random probability vector of length k, optionally with exact zeros.
inline std::vector<double> random_probs(std::mt19937_64& rng, int k, bool allow_zeros) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(k));
  double total = 0.0;
  for (auto& x : p) {
    x = allow_zeros && unit(rng) < 0.3 ? 0.0 : unit(rng) + 1e-3;
    total += x;
  }
  if (total == 0.0) {
    p[0] = 1.0;
    total = 1.0;
  }
  for (auto& x : p) x /= total;
  return p;
}

}  // namespace playtime::testing
