#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "playtime/core_model.hpp"
#include "playtime/error.hpp"

namespace playtime {

/// Empirical distribution over the days of one period. Daily variants have
/// no hour slot. A distribution whose total mass is zero is EMPTY and its
/// probabilities carry no meaning.
struct Distribution {
  int period = 1;
  std::optional<int> hour_slot;
  Eigen::VectorXd probs;
  double total_mass = 0.0;

  [[nodiscard]] bool empty() const { return !(total_mass > 0.0); }
};

namespace detail {

inline void check_period(const PeriodScheme& scheme, int k) {
  if (k < 1 || k > scheme.periods()) {
    throw Error(ErrorCode::PeriodOutOfRange,
                "period " + std::to_string(k) + " outside 1.." + std::to_string(scheme.periods()));
  }
}

inline void check_slot(int r) {
  if (r < 1 || r > kSlotsPerDay) {
    throw Error(ErrorCode::SlotOutOfRange, "hour slot " + std::to_string(r) + " outside 1..24");
  }
}

template <typename Derived>
void check_rows(const Eigen::MatrixBase<Derived>& playtime, const PeriodScheme& scheme) {
  if (playtime.rows() != scheme.days()) {
    throw Error(ErrorCode::SchemeMismatch, "window has " + std::to_string(playtime.rows()) +
                                               " days, scheme expects " +
                                               std::to_string(scheme.days()));
  }
}

inline Distribution normalized(Eigen::VectorXd mass, int k, std::optional<int> slot) {
  Distribution out{k, slot, std::move(mass), 0.0};
  out.total_mass = out.probs.sum();
  if (out.total_mass > 0.0) out.probs /= out.total_mass;
  return out;
}

}  // namespace detail

/// Day-total distribution of period k for any day-by-slot mass matrix.
template <typename Derived>
Distribution daily_distribution(const Eigen::MatrixBase<Derived>& playtime,
                                const PeriodScheme& scheme, int k) {
  detail::check_period(scheme, k);
  detail::check_rows(playtime, scheme);
  const auto len = scheme.period_length();
  Eigen::VectorXd day_totals =
      playtime.middleRows(scheme.first_day(k) - 1, len).rowwise().sum().template cast<double>();
  return detail::normalized(std::move(day_totals), k, std::nullopt);
}

/// Distribution of slot r's playtime over the days of period k.
template <typename Derived>
Distribution hourly_distribution(const Eigen::MatrixBase<Derived>& playtime,
                                 const PeriodScheme& scheme, int k, int r) {
  detail::check_period(scheme, k);
  detail::check_slot(r);
  detail::check_rows(playtime, scheme);
  const auto len = scheme.period_length();
  Eigen::VectorXd column =
      playtime.col(r - 1).segment(scheme.first_day(k) - 1, len).template cast<double>();
  return detail::normalized(std::move(column), k, r);
}

Distribution daily_individual(const PlayerWindow& window, const PeriodScheme& scheme, int k);
Distribution hourly_individual(const PlayerWindow& window, const PeriodScheme& scheme, int k,
                               int r);

/// Mass-pooled daily and hourly distributions of a churner population.
struct GlobalChurnerProfile {
  PeriodScheme scheme{1, 1};
  std::vector<Distribution> daily;   // index k-1
  std::vector<Distribution> hourly;  // index (k-1)*24 + (r-1)
  int source_population_size = 0;

  [[nodiscard]] const Distribution& daily_at(int k) const;
  [[nodiscard]] const Distribution& hourly_at(int k, int r) const;
};

/// Pools numerators over all windows before normalizing. Summation runs in
/// input order, so the result is reproducible bit for bit.
/// Throws EmptyPopulation and SchemeMismatch.
GlobalChurnerProfile build_global_profile(std::span<const PlayerWindow> churner_windows,
                                          const PeriodScheme& scheme);

inline constexpr int kProfileFormatVersion = 1;

std::string serialize_profile(const GlobalChurnerProfile& profile);
/// Throws Error(InvalidInput) for malformed or version-incompatible documents.
GlobalChurnerProfile deserialize_profile(std::string_view json_text);

}  // namespace playtime
