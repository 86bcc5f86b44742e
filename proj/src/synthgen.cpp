#include "playtime/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <tuple>

#include "playtime/error.hpp"
#include "playtime/parallel.hpp"

namespace playtime {
namespace {

constexpr double kSecondsPerHour = 3600.0;

struct PlayerSample {
  std::vector<PlaytimeRecord> records;
  ChurnLabel label;
};

std::array<double, kSlotsPerDay> slot_concentrations(const PopulationConfig& cfg) {
  std::array<double, kSlotsPerDay> w{};
  w.fill(cfg.base_slot_weight);
  for (const auto& [slot, weight] : cfg.preferred_slots) w[static_cast<std::size_t>(slot - 1)] += weight;
  for (int r = 1; r <= 6; ++r) w[static_cast<std::size_t>(r - 1)] *= cfg.night_damping;
  double total = 0.0;
  for (double x : w) total += x;
  // Mean concentration per slot equals cfg.slot_concentration.
  for (double& x : w) x = std::max(x / total * kSlotsPerDay * cfg.slot_concentration, 1e-3);
  return w;
}

std::string player_name(int index, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%0*d", width, index);
  return buf;
}

PlayerSample generate_player(const PopulationConfig& cfg, std::size_t index, const std::string& id,
                             bool churner, const std::array<double, kSlotsPerDay>& slot_alpha) {
  std::mt19937_64 rng(mix_seed(cfg.rng_seed, index + 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int gap = churner ? cfg.gap_days + 1 + std::uniform_int_distribution<int>(0, 6)(rng)
                          : std::uniform_int_distribution<int>(0, cfg.gap_days)(rng);
  const Date last = cfg.horizon_end - gap;
  const int history = cfg.history_days;
  const int window_start = history - cfg.window_days;  // first in-window day offset
  const double alpha =
      churner ? cfg.churner_day_concentration : cfg.nonchurner_day_concentration;

  const double intensity =
      std::exp(cfg.intensity_spread * std::normal_distribution<double>(0.0, 1.0)(rng));
  std::vector<double> mass(static_cast<std::size_t>(history));
  std::vector<bool> active(static_cast<std::size_t>(history));
  for (int j = 0; j < history; ++j) {
    // Churners play less and less evenly as the window advances.
    double scale = 1.0;
    if (churner && j >= window_start) {
      const int chunk = (j - window_start) * cfg.decay_periods / cfg.window_days;
      scale = std::pow(cfg.churner_decay, chunk);
    }
    const double a = alpha * scale;
    mass[static_cast<std::size_t>(j)] = scale * std::gamma_distribution<double>(a, 1.0)(rng) / a;
    active[static_cast<std::size_t>(j)] = unit(rng) < cfg.active_day_probability;
  }
  active.back() = true;
  auto active_count = std::count(active.begin(), active.end(), true);
  for (int j = 0; j < history && active_count < cfg.min_active_days; ++j) {
    if (!active[static_cast<std::size_t>(j)]) {
      active[static_cast<std::size_t>(j)] = true;
      ++active_count;
    }
  }

  PlayerSample sample{{}, {id, churner, last}};
  std::array<std::gamma_distribution<double>, kSlotsPerDay> slot_gamma;
  for (std::size_t r = 0; r < slot_gamma.size(); ++r) slot_gamma[r] = std::gamma_distribution<double>(slot_alpha[r], 1.0);
  for (int j = 0; j < history; ++j) {
    std::array<double, kSlotsPerDay> share{};
    double share_total = 0.0;
    for (std::size_t r = 0; r < share.size(); ++r) share_total += share[r] = slot_gamma[r](rng);
    if (!active[static_cast<std::size_t>(j)]) continue;
    const double hours = cfg.base_daily_hours * intensity * mass[static_cast<std::size_t>(j)];
    const Date date = last - (history - 1 - j);
    bool any = false;
    for (std::size_t r = 0; r < share.size(); ++r) {
      const double t = std::min(1.0, hours * share[r] / share_total);
      const double seconds = std::round(t * kSecondsPerHour);
      if (seconds <= 0.0) continue;
      sample.records.push_back({id, date, static_cast<int>(r) + 1, seconds / kSecondsPerHour});
      any = true;
    }
    // An active day always logs at least a second, in the heaviest slot.
    if (!any) {
      const auto top = std::max_element(share.begin(), share.end()) - share.begin();
      sample.records.push_back({id, date, static_cast<int>(top) + 1, 1.0 / kSecondsPerHour});
    }
  }
  std::sort(sample.records.begin(), sample.records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.date, a.hour_slot) < std::tie(b.date, b.hour_slot);
  });
  return sample;
}

}  // namespace

void PopulationConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (n_players < 2) fail("n_players must be at least 2");
  if (!(churner_fraction > 0.0 && churner_fraction < 1.0)) fail("churner_fraction must lie in (0, 1)");
  if (window_days < 1) fail("window_days must be positive");
  if (history_days < window_days) fail("history_days must be >= window_days");
  if (!(base_daily_hours > 0.0)) fail("base_daily_hours must be positive");
  if (!(intensity_spread >= 0.0)) fail("intensity_spread must be non-negative");
  if (!(nonchurner_day_concentration > 0.0) || !(churner_day_concentration > 0.0)) {
    fail("day concentrations must be positive");
  }
  if (!(churner_decay > 0.0 && churner_decay <= 1.0)) fail("churner_decay must lie in (0, 1]");
  if (decay_periods < 1 || decay_periods > window_days) fail("decay_periods must lie in 1..window_days");
  if (!(active_day_probability > 0.0 && active_day_probability <= 1.0)) {
    fail("active_day_probability must lie in (0, 1]");
  }
  for (const auto& [slot, weight] : preferred_slots) {
    if (slot < 1 || slot > kSlotsPerDay) fail("preferred slot outside 1..24");
    if (!(weight >= 0.0)) fail("preferred slot weight must be non-negative");
  }
  if (!(base_slot_weight >= 0.0)) fail("base_slot_weight must be non-negative");
  if (!(night_damping >= 0.0 && night_damping <= 1.0)) fail("night_damping must lie in [0, 1]");
  if (!(slot_concentration > 0.0)) fail("slot_concentration must be positive");
  if (gap_days < 0) fail("gap_days must be non-negative");
  if (min_active_days < 1 || min_active_days > history_days) {
    fail("min_active_days must lie in 1..history_days");
  }
}

Population generate(const PopulationConfig& cfg, unsigned threads) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.n_players);
  const auto churners = static_cast<std::size_t>(
      std::clamp<long long>(std::llround(cfg.churner_fraction * cfg.n_players), 1, cfg.n_players - 1));
  std::vector<bool> is_churner(n, false);
  std::fill(is_churner.begin(), is_churner.begin() + static_cast<std::ptrdiff_t>(churners), true);
  std::mt19937_64 class_rng(mix_seed(cfg.rng_seed, 0));
  std::shuffle(is_churner.begin(), is_churner.end(), class_rng);

  const int width = static_cast<int>(std::to_string(cfg.n_players).size());
  const auto slot_alpha = slot_concentrations(cfg);
  std::vector<PlayerSample> samples(n);
  parallel_for(n, threads, [&](std::size_t i) {
    samples[i] = generate_player(cfg, i, player_name(static_cast<int>(i) + 1, width), is_churner[i],
                                 slot_alpha);
  });

  Population pop;
  for (auto& s : samples) {
    pop.records.insert(pop.records.end(), std::make_move_iterator(s.records.begin()),
                       std::make_move_iterator(s.records.end()));
    pop.labels.push_back(std::move(s.label));
  }
  return pop;
}

}  // namespace playtime
