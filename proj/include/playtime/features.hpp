#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "playtime/core_model.hpp"
#include "playtime/distributions.hpp"
#include "playtime/entropy.hpp"

namespace playtime {

enum class FeatureType {
  Proposed1,         // daily entropy, static + rate
  Proposed2,         // hourly entropy, static + rate
  Proposed3,         // hourly cross-entropy vs. churner profile, static + rate
  ProposedCombined,  // 1 + 2 + 3
  BaselineRaw,       // flattened window
  Baseline1,         // day totals
  Baseline2,         // total hours, recency, frequency
};

inline constexpr FeatureType kProposedTypes[] = {FeatureType::Proposed1, FeatureType::Proposed2,
                                                 FeatureType::Proposed3,
                                                 FeatureType::ProposedCombined};
inline constexpr FeatureType kBaselineTypes[] = {FeatureType::BaselineRaw, FeatureType::Baseline1,
                                                 FeatureType::Baseline2};

std::string_view to_string(FeatureType type);
std::optional<FeatureType> parse_feature_type(std::string_view text);
bool is_baseline(FeatureType type);

/// Bound on rate features; also their value when the static feature they
/// are relative to is zero.
inline constexpr double kRateCap = 10.0;

struct FeatureVector {
  std::string player_id;
  FeatureType feature_type = FeatureType::Proposed1;
  PeriodScheme scheme{1, 1};
  std::vector<std::string> names;
  Eigen::VectorXd values;
  std::optional<bool> label;
};

/// Column names, a pure function of (type, scheme).
std::vector<std::string> feature_names(FeatureType type, const PeriodScheme& scheme);
std::size_t feature_count(FeatureType type, const PeriodScheme& scheme);

/// Static features f(u,1..m): the per-period values as given.
Eigen::VectorXd static_feature(std::span<const double> per_period);

/// Rate features g(u,k) = (f(u,k) - f(u,k+1)) / f(u,k) for k = 1..m-1,
/// clamped to [-kRateCap, kRateCap]. When f(u,k) = 0 the rate is 0 if
/// f(u,k+1) = 0 and -sign(f(u,k+1)) * kRateCap otherwise.
Eigen::VectorXd rate_feature(std::span<const double> per_period);

/// Proposed feature types. EMPTY periods impute a static value of 0.
/// Throws SchemeMismatch if window or profile disagree with the scheme.
FeatureVector assemble(const PlayerWindow& window, const GlobalChurnerProfile& profile,
                       const PeriodScheme& scheme, const EntropyConfig& cfg, FeatureType type);

/// Baseline feature types; the scheme only fixes the window length.
FeatureVector baseline(const PlayerWindow& window, const PeriodScheme& scheme, FeatureType type);

/// Rows of features for many players sharing one (type, scheme).
struct FeatureMatrix {
  FeatureType feature_type = FeatureType::Proposed1;
  PeriodScheme scheme{1, 1};
  std::vector<std::string> player_ids;
  std::vector<std::string> names;
  Eigen::MatrixXd values;   // one row per player
  std::vector<int> labels;  // 0/1 per row, or empty when unlabeled
};

/// Builds one row per window, in order, on up to `threads` workers. The
/// profile is required for Proposed3 and ProposedCombined and ignored
/// otherwise.
FeatureMatrix extract_features(std::span<const PlayerWindow> windows,
                               const GlobalChurnerProfile* profile, const PeriodScheme& scheme,
                               const EntropyConfig& cfg, FeatureType type, unsigned threads = 1);

/// Header "player_id,<names...>[,label]", one row per player.
void write_feature_csv(std::ostream& out, const FeatureMatrix& features);

}  // namespace playtime
