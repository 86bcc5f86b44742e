#pragma once

#include <Eigen/Core>

#include <set>
#include <span>
#include <string>
#include <vector>

#include "playtime/date.hpp"

namespace playtime {

inline constexpr int kSlotsPerDay = 24;

/// Day-by-slot playtime matrix: row d-1 holds day d, column r-1 holds slot r.
template <typename Scalar>
using PlaytimeMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, kSlotsPerDay, Eigen::RowMajor>;
using PlaytimeMatrix = PlaytimeMatrixT<double>;

/// One telemetry row. hour_slot r covers clock hour [r-1, r).
struct PlaytimeRecord {
  std::string player_id;
  Date date;
  int hour_slot = 1;
  double hours_played = 0.0;

  bool operator==(const PlaytimeRecord&) const = default;
};

/// A player's latest n days of playtime, aligned so that day n is the latest
/// date with positive playtime.
struct PlayerWindow {
  std::string player_id;
  Date latest_play_date;
  PlaytimeMatrix playtime;

  [[nodiscard]] int days() const { return static_cast<int>(playtime.rows()); }
  /// Calendar date of 1-based day index d.
  [[nodiscard]] Date date_of(int d) const { return latest_play_date - (days() - d); }
  /// The most recent `days` rows as a window of its own.
  [[nodiscard]] PlayerWindow latest(int days) const;
};

/// Partition of an n-day window into m equal periods. Period 1 is oldest.
class PeriodScheme {
 public:
  /// Throws NonDivisiblePartition unless m divides n, InvalidConfig unless n, m >= 1.
  PeriodScheme(int n, int m);

  /// Largest scheme with m periods that fits inside n days: n' = m * floor(n/m).
  /// Used when the requested window length is not a multiple of m.
  static PeriodScheme fitted(int n, int m);

  [[nodiscard]] int days() const { return n_; }
  [[nodiscard]] int periods() const { return m_; }
  [[nodiscard]] int period_length() const { return n_ / m_; }
  /// 1-based index of the first day of period k.
  [[nodiscard]] int first_day(int k) const { return (k - 1) * period_length() + 1; }

  bool operator==(const PeriodScheme&) const = default;

 private:
  int n_;
  int m_;
};

struct ChurnLabel {
  std::string player_id;
  bool is_churner = false;
  Date last_active_date;

  bool operator==(const ChurnLabel&) const = default;
};

/// D_1..D_m as ascending 1-based day indices.
std::vector<std::vector<int>> partition_periods(const PeriodScheme& scheme);

/// Sums duplicate (player, date, slot) rows and clamps each cell to one hour.
/// Output is sorted by (player, date, slot).
std::vector<PlaytimeRecord> consolidate(std::span<const PlaytimeRecord> records);

PlayerWindow build_window(std::span<const PlaytimeRecord> records, const std::string& player_id,
                          int n);

/// Windows for every listed player, in the order given. Records are grouped
/// once; windows are built in parallel on up to `threads` workers.
std::vector<PlayerWindow> build_windows(std::span<const PlaytimeRecord> records,
                                        std::span<const std::string> player_ids, int n,
                                        unsigned threads = 1);

/// Players sorted by id. is_churner iff horizon_end - last_active_date > gap_days.
std::vector<ChurnLabel> label_players(std::span<const PlaytimeRecord> records, Date horizon_end,
                                      int gap_days = 3);

/// Players with at least min_days distinct dates of positive playtime.
std::set<std::string> filter_long_term(std::span<const PlaytimeRecord> records, int min_days = 15);

}  // namespace playtime
