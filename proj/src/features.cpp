#include "playtime/features.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "playtime/ingest.hpp"
#include "playtime/parallel.hpp"

namespace playtime {
namespace {

std::string padded(char prefix, int value) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%02d", prefix, value);
  return buf;
}

void append_static_and_rate_names(std::vector<std::string>& names, const std::string& stem,
                                  int m) {
  for (int k = 1; k <= m; ++k) names.push_back(stem + ".k" + std::to_string(k));
  for (int k = 1; k < m; ++k) names.push_back(stem + ".rate.k" + std::to_string(k));
}

void check_scheme(const PlayerWindow& window, const PeriodScheme& scheme) {
  if (window.days() != scheme.days()) {
    throw Error(ErrorCode::SchemeMismatch, "window of player '" + window.player_id + "' has " +
                                               std::to_string(window.days()) +
                                               " days, scheme expects " +
                                               std::to_string(scheme.days()));
  }
}

// Statics for k = 1..m followed by rates for k = 1..m-1.
void append_static_and_rate(std::vector<double>& out, const std::vector<double>& per_period) {
  out.insert(out.end(), per_period.begin(), per_period.end());
  const Eigen::VectorXd rates = rate_feature(per_period);
  out.insert(out.end(), rates.begin(), rates.end());
}

double entropy_or_zero(const Distribution& d, const EntropyConfig& cfg) {
  return d.empty() ? 0.0 : entropy(d, cfg);
}

// An EMPTY reference carries no information about the churner community;
// the player's distribution is scored against the uniform one instead.
double cross_entropy_or_zero(const Distribution& p, const Distribution& q,
                             const EntropyConfig& cfg) {
  if (p.empty()) return 0.0;
  if (q.empty()) {
    const Eigen::VectorXd uniform =
        Eigen::VectorXd::Constant(p.probs.size(), 1.0 / static_cast<double>(p.probs.size()));
    return cross_entropy(p.probs, uniform, cfg.log_base, 0.0);
  }
  return cross_entropy(p, q, cfg);
}

void append_daily_entropy(std::vector<double>& out, const PlayerWindow& w,
                          const PeriodScheme& scheme, const EntropyConfig& cfg) {
  std::vector<double> per_period;
  for (int k = 1; k <= scheme.periods(); ++k) {
    per_period.push_back(entropy_or_zero(daily_individual(w, scheme, k), cfg));
  }
  append_static_and_rate(out, per_period);
}

void append_hourly_entropy(std::vector<double>& out, const PlayerWindow& w,
                           const PeriodScheme& scheme, const EntropyConfig& cfg) {
  for (int r = 1; r <= kSlotsPerDay; ++r) {
    std::vector<double> per_period;
    for (int k = 1; k <= scheme.periods(); ++k) {
      per_period.push_back(entropy_or_zero(hourly_individual(w, scheme, k, r), cfg));
    }
    append_static_and_rate(out, per_period);
  }
}

void append_hourly_cross_entropy(std::vector<double>& out, const PlayerWindow& w,
                                 const GlobalChurnerProfile& profile, const PeriodScheme& scheme,
                                 const EntropyConfig& cfg) {
  for (int r = 1; r <= kSlotsPerDay; ++r) {
    std::vector<double> per_period;
    for (int k = 1; k <= scheme.periods(); ++k) {
      per_period.push_back(
          cross_entropy_or_zero(hourly_individual(w, scheme, k, r), profile.hourly_at(k, r), cfg));
    }
    append_static_and_rate(out, per_period);
  }
}

std::vector<double> proposed_values(const PlayerWindow& window,
                                    const GlobalChurnerProfile* profile,
                                    const PeriodScheme& scheme, const EntropyConfig& cfg,
                                    FeatureType type) {
  check_scheme(window, scheme);
  const bool needs_profile =
      type == FeatureType::Proposed3 || type == FeatureType::ProposedCombined;
  if (needs_profile) {
    if (profile == nullptr) {
      throw Error(ErrorCode::InvalidConfig,
                  std::string(to_string(type)) + " features need a churner profile");
    }
    if (!(profile->scheme == scheme)) {
      throw Error(ErrorCode::SchemeMismatch, "profile scheme differs from feature scheme");
    }
  }
  std::vector<double> values;
  values.reserve(feature_count(type, scheme));
  if (type == FeatureType::Proposed1 || type == FeatureType::ProposedCombined) {
    append_daily_entropy(values, window, scheme, cfg);
  }
  if (type == FeatureType::Proposed2 || type == FeatureType::ProposedCombined) {
    append_hourly_entropy(values, window, scheme, cfg);
  }
  if (needs_profile) append_hourly_cross_entropy(values, window, *profile, scheme, cfg);
  return values;
}

std::vector<double> baseline_values(const PlayerWindow& window, const PeriodScheme& scheme,
                                    FeatureType type) {
  check_scheme(window, scheme);
  const auto& t = window.playtime;
  switch (type) {
    case FeatureType::BaselineRaw:
      return std::vector<double>(t.data(), t.data() + t.size());
    case FeatureType::Baseline1: {
      const Eigen::VectorXd totals = t.rowwise().sum();
      return std::vector<double>(totals.begin(), totals.end());
    }
    case FeatureType::Baseline2: {
      int recency = 0;
      for (int d = window.days(); d >= 1; --d) {
        if ((t.row(d - 1).array() > 0.0).any()) {
          recency = d;
          break;
        }
      }
      const auto frequency = static_cast<double>((t.array() > 0.0).count());
      return {t.sum(), static_cast<double>(recency), frequency};
    }
    default:
      throw Error(ErrorCode::InvalidConfig, std::string(to_string(type)) + " is not a baseline");
  }
}

FeatureVector make_vector(const PlayerWindow& window, const PeriodScheme& scheme, FeatureType type,
                          const std::vector<double>& values) {
  FeatureVector fv{window.player_id, type, scheme, feature_names(type, scheme),
                   Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                     static_cast<Eigen::Index>(values.size())),
                   std::nullopt};
  return fv;
}

}  // namespace

std::string_view to_string(FeatureType type) {
  switch (type) {
    case FeatureType::Proposed1: return "proposed1";
    case FeatureType::Proposed2: return "proposed2";
    case FeatureType::Proposed3: return "proposed3";
    case FeatureType::ProposedCombined: return "combined";
    case FeatureType::BaselineRaw: return "raw";
    case FeatureType::Baseline1: return "baseline1";
    case FeatureType::Baseline2: return "baseline2";
  }
  return "unknown";
}

std::optional<FeatureType> parse_feature_type(std::string_view text) {
  for (auto type : kProposedTypes) {
    if (to_string(type) == text) return type;
  }
  for (auto type : kBaselineTypes) {
    if (to_string(type) == text) return type;
  }
  return std::nullopt;
}

bool is_baseline(FeatureType type) {
  return type == FeatureType::BaselineRaw || type == FeatureType::Baseline1 ||
         type == FeatureType::Baseline2;
}

std::vector<std::string> feature_names(FeatureType type, const PeriodScheme& scheme) {
  const int m = scheme.periods();
  std::vector<std::string> names;
  const bool combined = type == FeatureType::ProposedCombined;
  if (type == FeatureType::Proposed1 || combined) append_static_and_rate_names(names, "dailyH", m);
  if (type == FeatureType::Proposed2 || combined) {
    for (int r = 1; r <= kSlotsPerDay; ++r) {
      append_static_and_rate_names(names, "hourlyH." + padded('r', r), m);
    }
  }
  if (type == FeatureType::Proposed3 || combined) {
    for (int r = 1; r <= kSlotsPerDay; ++r) {
      append_static_and_rate_names(names, "xent." + padded('r', r), m);
    }
  }
  switch (type) {
    case FeatureType::BaselineRaw:
      for (int d = 1; d <= scheme.days(); ++d) {
        for (int r = 1; r <= kSlotsPerDay; ++r) {
          names.push_back("raw." + padded('d', d) + "." + padded('r', r));
        }
      }
      break;
    case FeatureType::Baseline1:
      for (int d = 1; d <= scheme.days(); ++d) names.push_back("daytotal." + padded('d', d));
      break;
    case FeatureType::Baseline2:
      names = {"rfm.total", "rfm.recency", "rfm.frequency"};
      break;
    default:
      break;
  }
  return names;
}

std::size_t feature_count(FeatureType type, const PeriodScheme& scheme) {
  const auto m = static_cast<std::size_t>(scheme.periods());
  const auto n = static_cast<std::size_t>(scheme.days());
  switch (type) {
    case FeatureType::Proposed1: return 2 * m - 1;
    case FeatureType::Proposed2:
    case FeatureType::Proposed3: return kSlotsPerDay * (2 * m - 1);
    case FeatureType::ProposedCombined: return (2 * kSlotsPerDay + 1) * (2 * m - 1);
    case FeatureType::BaselineRaw: return kSlotsPerDay * n;
    case FeatureType::Baseline1: return n;
    case FeatureType::Baseline2: return 3;
  }
  return 0;
}

Eigen::VectorXd static_feature(std::span<const double> per_period) {
  return Eigen::Map<const Eigen::VectorXd>(per_period.data(),
                                           static_cast<Eigen::Index>(per_period.size()));
}

Eigen::VectorXd rate_feature(std::span<const double> per_period) {
  const auto m = static_cast<Eigen::Index>(per_period.size());
  Eigen::VectorXd rates(std::max<Eigen::Index>(m - 1, 0));
  for (Eigen::Index k = 0; k + 1 < m; ++k) {
    const double current = per_period[static_cast<std::size_t>(k)];
    const double next = per_period[static_cast<std::size_t>(k + 1)];
    if (current == 0.0) {
      rates(k) = next == 0.0 ? 0.0 : (next > 0.0 ? -kRateCap : kRateCap);
    } else {
      rates(k) = std::clamp((current - next) / current, -kRateCap, kRateCap);
    }
  }
  return rates;
}

FeatureVector assemble(const PlayerWindow& window, const GlobalChurnerProfile& profile,
                       const PeriodScheme& scheme, const EntropyConfig& cfg, FeatureType type) {
  if (is_baseline(type)) {
    throw Error(ErrorCode::InvalidConfig, "assemble() builds proposed feature types only");
  }
  if (!(profile.scheme == scheme)) {
    throw Error(ErrorCode::SchemeMismatch, "profile scheme differs from feature scheme");
  }
  return make_vector(window, scheme, type, proposed_values(window, &profile, scheme, cfg, type));
}

FeatureVector baseline(const PlayerWindow& window, const PeriodScheme& scheme, FeatureType type) {
  return make_vector(window, scheme, type, baseline_values(window, scheme, type));
}

FeatureMatrix extract_features(std::span<const PlayerWindow> windows,
                               const GlobalChurnerProfile* profile, const PeriodScheme& scheme,
                               const EntropyConfig& cfg, FeatureType type, unsigned threads) {
  FeatureMatrix out;
  out.feature_type = type;
  out.scheme = scheme;
  out.names = feature_names(type, scheme);
  out.values.resize(static_cast<Eigen::Index>(windows.size()),
                    static_cast<Eigen::Index>(out.names.size()));
  out.player_ids.reserve(windows.size());
  for (const auto& w : windows) out.player_ids.push_back(w.player_id);
  parallel_for(windows.size(), threads, [&](std::size_t i) {
    const auto values = is_baseline(type) ? baseline_values(windows[i], scheme, type)
                                          : proposed_values(windows[i], profile, scheme, cfg, type);
    out.values.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  });
  return out;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& features) {
  const bool labeled = !features.labels.empty();
  out << "player_id";
  for (const auto& name : features.names) out << ',' << name;
  if (labeled) out << ",label";
  out << '\n';
  for (Eigen::Index i = 0; i < features.values.rows(); ++i) {
    out << features.player_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < features.values.cols(); ++j) {
      out << ',' << format_double(features.values(i, j));
    }
    if (labeled) out << ',' << features.labels[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

}  // namespace playtime
