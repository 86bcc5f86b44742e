#include "playtime/distributions.hpp"

#include <json.hpp>

namespace playtime {

using nlohmann::json;

Distribution daily_individual(const PlayerWindow& window, const PeriodScheme& scheme, int k) {
  return daily_distribution(window.playtime, scheme, k);
}

Distribution hourly_individual(const PlayerWindow& window, const PeriodScheme& scheme, int k,
                               int r) {
  return hourly_distribution(window.playtime, scheme, k, r);
}

const Distribution& GlobalChurnerProfile::daily_at(int k) const {
  detail::check_period(scheme, k);
  return daily[static_cast<std::size_t>(k - 1)];
}

const Distribution& GlobalChurnerProfile::hourly_at(int k, int r) const {
  detail::check_period(scheme, k);
  detail::check_slot(r);
  return hourly[static_cast<std::size_t>((k - 1) * kSlotsPerDay + (r - 1))];
}

GlobalChurnerProfile build_global_profile(std::span<const PlayerWindow> churner_windows,
                                          const PeriodScheme& scheme) {
  if (churner_windows.empty()) {
    throw Error(ErrorCode::EmptyPopulation, "no churner windows to build a profile from");
  }
  PlaytimeMatrix pooled = PlaytimeMatrix::Zero(scheme.days(), kSlotsPerDay);
  for (const auto& window : churner_windows) {
    detail::check_rows(window.playtime, scheme);
    pooled += window.playtime;
  }
  GlobalChurnerProfile profile{scheme, {}, {}, static_cast<int>(churner_windows.size())};
  profile.daily.reserve(static_cast<std::size_t>(scheme.periods()));
  profile.hourly.reserve(static_cast<std::size_t>(scheme.periods() * kSlotsPerDay));
  for (int k = 1; k <= scheme.periods(); ++k) {
    profile.daily.push_back(daily_distribution(pooled, scheme, k));
    for (int r = 1; r <= kSlotsPerDay; ++r) {
      profile.hourly.push_back(hourly_distribution(pooled, scheme, k, r));
    }
  }
  return profile;
}

namespace {

json distribution_to_json(const Distribution& d) {
  json j{{"k", d.period}, {"total_mass", d.total_mass}};
  if (d.hour_slot) j["slot"] = *d.hour_slot;
  if (d.empty()) {
    j["probs"] = json::array();
  } else {
    j["probs"] = std::vector<double>(d.probs.begin(), d.probs.end());
  }
  return j;
}

Distribution distribution_from_json(const json& j, int period_length) {
  Distribution d;
  d.period = j.at("k").get<int>();
  if (j.contains("slot")) d.hour_slot = j.at("slot").get<int>();
  d.total_mass = j.at("total_mass").get<double>();
  const auto probs = j.at("probs").get<std::vector<double>>();
  if (d.empty()) {
    d.probs = Eigen::VectorXd::Zero(period_length);
  } else {
    if (static_cast<int>(probs.size()) != period_length) {
      throw Error(ErrorCode::InvalidInput, "profile distribution has " +
                                               std::to_string(probs.size()) + " entries, expected " +
                                               std::to_string(period_length));
    }
    d.probs = Eigen::Map<const Eigen::VectorXd>(probs.data(), period_length);
  }
  return d;
}

}  // namespace

std::string serialize_profile(const GlobalChurnerProfile& profile) {
  json doc{{"format", "playtime.churner_profile"},
           {"version", kProfileFormatVersion},
           {"scheme", {{"n", profile.scheme.days()}, {"m", profile.scheme.periods()}}},
           {"source_population_size", profile.source_population_size}};
  auto& daily = doc["daily"] = json::array();
  for (const auto& d : profile.daily) daily.push_back(distribution_to_json(d));
  auto& hourly = doc["hourly"] = json::array();
  for (const auto& d : profile.hourly) hourly.push_back(distribution_to_json(d));
  return doc.dump(1);
}

GlobalChurnerProfile deserialize_profile(std::string_view json_text) {
  try {
    const auto doc = json::parse(json_text);
    if (doc.at("format") != "playtime.churner_profile") {
      throw Error(ErrorCode::InvalidInput, "not a churner profile document");
    }
    if (doc.at("version").get<int>() != kProfileFormatVersion) {
      throw Error(ErrorCode::InvalidInput,
                  "unsupported profile version " + doc.at("version").dump());
    }
    const PeriodScheme scheme(doc.at("scheme").at("n").get<int>(),
                              doc.at("scheme").at("m").get<int>());
    GlobalChurnerProfile profile{scheme, {}, {}, doc.at("source_population_size").get<int>()};
    for (const auto& j : doc.at("daily")) {
      profile.daily.push_back(distribution_from_json(j, scheme.period_length()));
    }
    for (const auto& j : doc.at("hourly")) {
      profile.hourly.push_back(distribution_from_json(j, scheme.period_length()));
    }
    if (profile.daily.size() != static_cast<std::size_t>(scheme.periods()) ||
        profile.hourly.size() != static_cast<std::size_t>(scheme.periods() * kSlotsPerDay)) {
      throw Error(ErrorCode::InvalidInput, "profile component count does not match its scheme");
    }
    return profile;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed profile JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Input) throw;
    throw Error(ErrorCode::InvalidInput, std::string("invalid profile: ") + e.what());
  }
}

}  // namespace playtime
