#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "playtime/core_model.hpp"

namespace playtime {

/// Knobs for a synthetic population. Day-level playtime is Dirichlet
/// distributed (via normalized Gamma draws), so the class concentrations set
/// how even each player's daily mass is; churners additionally play less
/// period by period and stop playing more than gap_days before horizon_end.
struct PopulationConfig {
  int n_players = 2000;
  double churner_fraction = 0.5;
  int window_days = 15;
  /// Days of activity generated per player, ending at the last active date.
  int history_days = 30;
  double base_daily_hours = 2.0;
  /// Log-scale spread of a per-player intensity multiplier (median 1).
  double intensity_spread = 1.5;
  double nonchurner_day_concentration = 8.0;
  double churner_day_concentration = 0.8;
  /// In the p-th of decay_periods equal chunks of the window, churner daily
  /// hours and day concentration are both multiplied by decay^(p-1).
  double churner_decay = 0.75;
  int decay_periods = 3;
  double active_day_probability = 0.9;
  /// (slot 1..24, weight) pairs added on top of a flat base weight.
  std::vector<std::pair<int, double>> preferred_slots{{12, 1.0}, {13, 1.0}, {19, 1.5}, {20, 2.0},
                                                      {21, 2.0}, {22, 1.5}, {23, 1.0}};
  double base_slot_weight = 0.2;
  /// Multiplier on slots 1-6.
  double night_damping = 0.2;
  /// Dirichlet concentration per slot when spreading a day's hours.
  double slot_concentration = 1.0;
  int gap_days = 3;
  /// Every player is active on at least this many distinct dates.
  int min_active_days = 15;
  Date horizon_end = Date::from_ymd(2018, 12, 31);
  std::uint64_t rng_seed = 42;

  /// Throws Error(InvalidConfig).
  void validate() const;
};

struct Population {
  std::vector<PlaytimeRecord> records;  // sorted by player, date, slot
  std::vector<ChurnLabel> labels;       // sorted by player
};

/// Players are generated independently from per-player RNG substreams; the
/// result does not depend on `threads`.
Population generate(const PopulationConfig& cfg, unsigned threads = 1);

}  // namespace playtime
