#include "playtime/core_model.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <unordered_map>

#include "playtime/error.hpp"
#include "playtime/parallel.hpp"

namespace playtime {
namespace {

bool record_less(const PlaytimeRecord& a, const PlaytimeRecord& b) {
  return std::tie(a.player_id, a.date, a.hour_slot, a.hours_played) <
         std::tie(b.player_id, b.date, b.hour_slot, b.hours_played);
}

// Expects records of a single player, already consolidated.
PlayerWindow window_from_consolidated(std::span<const PlaytimeRecord> records,
                                      const std::string& player_id, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "window length must be >= 1");
  std::optional<Date> latest;
  for (const auto& rec : records) {
    if (rec.hours_played > 0.0 && (!latest || rec.date > *latest)) latest = rec.date;
  }
  if (!latest) {
    throw Error(ErrorCode::NoRecordsForPlayer, "no positive playtime for player '" + player_id + "'");
  }
  PlayerWindow window{player_id, *latest, PlaytimeMatrix::Zero(n, kSlotsPerDay)};
  for (const auto& rec : records) {
    const int offset = *latest - rec.date;
    if (offset < 0 || offset >= n) continue;
    window.playtime(n - 1 - offset, rec.hour_slot - 1) = rec.hours_played;
  }
  return window;
}

}  // namespace

PlayerWindow PlayerWindow::latest(int days) const {
  if (days < 1 || days > this->days()) {
    throw Error(ErrorCode::InvalidConfig, "cannot take " + std::to_string(days) +
                                              " latest days of a " + std::to_string(this->days()) +
                                              "-day window");
  }
  return {player_id, latest_play_date, playtime.bottomRows(days)};
}

PeriodScheme::PeriodScheme(int n, int m) : n_(n), m_(m) {
  if (n < 1 || m < 1) {
    throw Error(ErrorCode::InvalidConfig, "period scheme needs n >= 1 and m >= 1");
  }
  if (n % m != 0) {
    throw Error(ErrorCode::NonDivisiblePartition,
                std::to_string(m) + " does not divide " + std::to_string(n));
  }
}

PeriodScheme PeriodScheme::fitted(int n, int m) {
  if (m < 1 || n < m) {
    throw Error(ErrorCode::InvalidConfig,
                "cannot fit " + std::to_string(m) + " periods into " + std::to_string(n) + " days");
  }
  return PeriodScheme(m * (n / m), m);
}

std::vector<std::vector<int>> partition_periods(const PeriodScheme& scheme) {
  const int len = scheme.period_length();
  std::vector<std::vector<int>> periods(static_cast<std::size_t>(scheme.periods()));
  for (int k = 1; k <= scheme.periods(); ++k) {
    auto& days = periods[static_cast<std::size_t>(k - 1)];
    days.reserve(static_cast<std::size_t>(len));
    for (int i = 1; i <= len; ++i) days.push_back((k - 1) * len + i);
  }
  return periods;
}

std::vector<PlaytimeRecord> consolidate(std::span<const PlaytimeRecord> records) {
  std::vector<PlaytimeRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(), record_less);
  std::vector<PlaytimeRecord> out;
  out.reserve(sorted.size());
  for (auto& rec : sorted) {
    if (!out.empty() && out.back().player_id == rec.player_id && out.back().date == rec.date &&
        out.back().hour_slot == rec.hour_slot) {
      out.back().hours_played += rec.hours_played;
    } else {
      out.push_back(std::move(rec));
    }
  }
  for (auto& rec : out) rec.hours_played = std::min(rec.hours_played, 1.0);
  return out;
}

PlayerWindow build_window(std::span<const PlaytimeRecord> records, const std::string& player_id,
                          int n) {
  std::vector<PlaytimeRecord> mine;
  for (const auto& rec : records) {
    if (rec.player_id == player_id) mine.push_back(rec);
  }
  return window_from_consolidated(consolidate(mine), player_id, n);
}

std::vector<PlayerWindow> build_windows(std::span<const PlaytimeRecord> records,
                                        std::span<const std::string> player_ids, int n,
                                        unsigned threads) {
  std::unordered_map<std::string, std::size_t> slot_of;
  for (std::size_t i = 0; i < player_ids.size(); ++i) slot_of.emplace(player_ids[i], i);
  std::vector<std::vector<PlaytimeRecord>> grouped(player_ids.size());
  for (const auto& rec : records) {
    if (auto it = slot_of.find(rec.player_id); it != slot_of.end()) {
      grouped[it->second].push_back(rec);
    }
  }
  std::vector<PlayerWindow> windows(player_ids.size());
  parallel_for(player_ids.size(), threads, [&](std::size_t i) {
    windows[i] = window_from_consolidated(consolidate(grouped[i]), player_ids[i], n);
  });
  return windows;
}

std::vector<ChurnLabel> label_players(std::span<const PlaytimeRecord> records, Date horizon_end,
                                      int gap_days) {
  std::map<std::string, Date> last_active;
  for (const auto& rec : records) {
    if (rec.date > horizon_end) {
      throw Error(ErrorCode::InvalidConfig, "record dated " + rec.date.to_string() +
                                                " lies after horizon end " + horizon_end.to_string());
    }
    if (rec.hours_played <= 0.0) continue;
    auto [it, inserted] = last_active.emplace(rec.player_id, rec.date);
    if (!inserted && rec.date > it->second) it->second = rec.date;
  }
  std::vector<ChurnLabel> labels;
  labels.reserve(last_active.size());
  for (const auto& [id, last] : last_active) {
    labels.push_back({id, (horizon_end - last) > gap_days, last});
  }
  return labels;
}

std::set<std::string> filter_long_term(std::span<const PlaytimeRecord> records, int min_days) {
  std::map<std::string, std::set<Date>> active_dates;
  for (const auto& rec : records) {
    if (rec.hours_played > 0.0) active_dates[rec.player_id].insert(rec.date);
  }
  std::set<std::string> kept;
  for (const auto& [id, dates] : active_dates) {
    if (static_cast<int>(dates.size()) >= min_days) kept.insert(id);
  }
  return kept;
}

}  // namespace playtime
