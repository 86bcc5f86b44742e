#include <doctest.h>

#include <random>

#include "playtime/distributions.hpp"
#include "playtime/error.hpp"
#include "test_support.hpp"

using namespace playtime;
using playtime::testing::random_window;

namespace {

PlayerWindow window_from_day_totals(std::vector<double> totals) {
  const int n = static_cast<int>(totals.size());
  PlayerWindow w{"u", Date::from_ymd(2018, 12, 31), PlaytimeMatrix::Zero(n, kSlotsPerDay)};
  for (int d = 0; d < n; ++d) {
    // Spread each total over two slots so the row sum is what matters.
    w.playtime(d, 0) = totals[static_cast<std::size_t>(d)] * 0.25;
    w.playtime(d, 10) = totals[static_cast<std::size_t>(d)] * 0.75;
  }
  return w;
}

}  // namespace

TEST_CASE("daily distribution of 5, 6, 8 hours") {
  const auto w = window_from_day_totals({5, 6, 8});
  const auto p = daily_individual(w, PeriodScheme(3, 1), 1);
  REQUIRE_FALSE(p.empty());
  CHECK(p.total_mass == doctest::Approx(19.0));
  CHECK(p.probs(0) == doctest::Approx(5.0 / 19).epsilon(1e-15));
  CHECK(p.probs(1) == doctest::Approx(6.0 / 19).epsilon(1e-15));
  CHECK(p.probs(2) == doctest::Approx(8.0 / 19).epsilon(1e-15));
  CHECK_FALSE(p.hour_slot);
}

TEST_CASE("daily single-day and empty periods") {
  const auto w = window_from_day_totals({4, 0, 0, 0, 0, 1});
  const PeriodScheme scheme(6, 2);
  CHECK(daily_individual(w, scheme, 1).probs == Eigen::Vector3d(1, 0, 0));
  const auto zero = window_from_day_totals({0, 0, 0, 1, 1, 1});
  CHECK(daily_individual(zero, scheme, 1).empty());
  CHECK_FALSE(daily_individual(zero, scheme, 2).empty());
}

TEST_CASE("hourly distribution of slot 9") {
  PlayerWindow w{"u", Date::from_ymd(2018, 12, 31), PlaytimeMatrix::Zero(3, kSlotsPerDay)};
  w.playtime(0, 8) = 0.1;
  w.playtime(1, 8) = 0.2;
  w.playtime(2, 8) = 0.3;
  w.playtime(2, 3) = 0.5;
  const auto p = hourly_individual(w, PeriodScheme(3, 1), 1, 9);
  CHECK(p.hour_slot == 9);
  CHECK(p.probs(0) == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(p.probs(1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(p.probs(2) == doctest::Approx(1.0 / 2).epsilon(1e-15));
  CHECK(hourly_individual(w, PeriodScheme(3, 1), 1, 4).probs == Eigen::Vector3d(0, 0, 1));
  CHECK(hourly_individual(w, PeriodScheme(3, 1), 1, 5).empty());
}

TEST_CASE("range errors") {
  std::mt19937_64 rng(1);
  const auto w = random_window(rng, 15);
  const PeriodScheme scheme(15, 5);
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidConfig;
  };
  CHECK(code_of([&] { daily_individual(w, scheme, 0); }) == ErrorCode::PeriodOutOfRange);
  CHECK(code_of([&] { daily_individual(w, scheme, 6); }) == ErrorCode::PeriodOutOfRange);
  CHECK(code_of([&] { hourly_individual(w, scheme, 1, 0); }) == ErrorCode::SlotOutOfRange);
  CHECK(code_of([&] { hourly_individual(w, scheme, 1, 25); }) == ErrorCode::SlotOutOfRange);
  CHECK(code_of([&] { daily_individual(w, PeriodScheme(12, 4), 1); }) == ErrorCode::SchemeMismatch);
}

TEST_CASE("non-empty distributions sum to one and are scale invariant") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto w = random_window(rng, 15);
    auto scaled = w;
    scaled.playtime *= 0.37;
    for (int m : {1, 3, 5, 15}) {
      const PeriodScheme scheme(15, m);
      for (int k = 1; k <= m; ++k) {
        const auto p = daily_individual(w, scheme, k);
        if (!p.empty()) {
          CHECK(p.probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
          CHECK((p.probs - daily_individual(scaled, scheme, k).probs).cwiseAbs().maxCoeff() <= 1e-12);
        }
        for (int r = 1; r <= kSlotsPerDay; ++r) {
          const auto h = hourly_individual(w, scheme, k, r);
          if (h.empty()) continue;
          CHECK(h.probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
          CHECK((h.probs - hourly_individual(scaled, scheme, k, r).probs).cwiseAbs().maxCoeff() <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("float windows go through the same template") {
  PlaytimeMatrixT<float> m = PlaytimeMatrixT<float>::Zero(3, kSlotsPerDay);
  m(0, 0) = 5;
  m(1, 0) = 6;
  m(2, 0) = 8;
  const auto p = daily_distribution(m, PeriodScheme(3, 1), 1);
  CHECK(p.probs(2) == doctest::Approx(8.0 / 19).epsilon(1e-6));
}

TEST_CASE("global profile of a single churner equals the individual distribution") {
  std::mt19937_64 rng(3);
  const std::vector<PlayerWindow> one{random_window(rng, 15)};
  const PeriodScheme scheme(15, 5);
  const auto profile = build_global_profile(one, scheme);
  CHECK(profile.source_population_size == 1);
  for (int k = 1; k <= 5; ++k) {
    const auto p = daily_individual(one[0], scheme, k);
    if (!p.empty()) CHECK((profile.daily_at(k).probs - p.probs).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("pooled mass of two churners") {
  const std::vector<PlayerWindow> two{window_from_day_totals({1, 0, 0}), window_from_day_totals({0, 1, 0})};
  const auto profile = build_global_profile(two, PeriodScheme(3, 1));
  CHECK(profile.daily_at(1).probs.isApprox(Eigen::Vector3d(0.5, 0.5, 0.0)));
  // Nobody ever plays slot 4.
  CHECK(profile.hourly_at(1, 4).empty());
}

TEST_CASE("pooling weights by mass, not by player") {
  auto heavy = window_from_day_totals({10, 0, 0});
  auto light = window_from_day_totals({0, 0, 1});
  const std::vector<PlayerWindow> pop{heavy, light};
  const auto profile = build_global_profile(pop, PeriodScheme(3, 1));
  CHECK(profile.daily_at(1).probs.isApprox(Eigen::Vector3d(10.0 / 11, 0, 1.0 / 11)));
}

TEST_CASE("global profile against a brute-force oracle") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int size = 1 + static_cast<int>(rng() % 5);
    std::vector<PlayerWindow> pop;
    for (int i = 0; i < size; ++i) pop.push_back(random_window(rng, 15));
    const PeriodScheme scheme(15, 3);
    const auto profile = build_global_profile(pop, scheme);
    for (int k = 1; k <= 3; ++k) {
      const int first = scheme.first_day(k) - 1;
      std::vector<double> num(5, 0.0);
      double den = 0.0;
      for (const auto& w : pop) {
        for (int d = 0; d < 5; ++d) {
          for (int r = 0; r < kSlotsPerDay; ++r) {
            num[static_cast<std::size_t>(d)] += w.playtime(first + d, r);
            den += w.playtime(first + d, r);
          }
        }
      }
      const auto& got = profile.daily_at(k);
      REQUIRE(got.empty() == (den == 0.0));
      for (int d = 0; d < 5 && den > 0.0; ++d) {
        CHECK(std::abs(got.probs(d) - num[static_cast<std::size_t>(d)] / den) <= 1e-12);
      }
      for (int r = 1; r <= kSlotsPerDay; ++r) {
        double col = 0.0;
        for (const auto& w : pop) col += w.playtime.col(r - 1).segment(first, 5).sum();
        const auto& h = profile.hourly_at(k, r);
        REQUIRE(h.empty() == (col == 0.0));
        for (int d = 0; d < 5 && col > 0.0; ++d) {
          double cell = 0.0;
          for (const auto& w : pop) cell += w.playtime(first + d, r - 1);
          CHECK(std::abs(h.probs(d) - cell / col) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("profile errors") {
  const std::vector<PlayerWindow> none;
  try {
    build_global_profile(none, PeriodScheme(15, 5));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyPopulation);
    CHECK(e.kind() == ErrorKind::Degenerate);
  }
  std::mt19937_64 rng(5);
  const std::vector<PlayerWindow> mixed{random_window(rng, 15), random_window(rng, 14)};
  CHECK_THROWS_AS(build_global_profile(mixed, PeriodScheme(15, 5)), Error);
}

TEST_CASE("profile JSON round trip is exact") {
  std::mt19937_64 rng(6);
  std::vector<PlayerWindow> pop;
  for (int i = 0; i < 4; ++i) pop.push_back(random_window(rng, 15));
  pop[0].playtime.col(3).setZero();
  pop[1].playtime.col(3).setZero();
  pop[2].playtime.col(3).setZero();
  pop[3].playtime.col(3).setZero();
  const auto profile = build_global_profile(pop, PeriodScheme(15, 5));
  const auto text = serialize_profile(profile);
  const auto back = deserialize_profile(text);
  CHECK(back.scheme == profile.scheme);
  CHECK(back.source_population_size == 4);
  REQUIRE(back.hourly.size() == profile.hourly.size());
  for (std::size_t i = 0; i < back.hourly.size(); ++i) {
    CHECK(back.hourly[i].empty() == profile.hourly[i].empty());
    CHECK(back.hourly[i].hour_slot == profile.hourly[i].hour_slot);
    if (!back.hourly[i].empty()) CHECK(back.hourly[i].probs == profile.hourly[i].probs);
  }
  for (std::size_t i = 0; i < back.daily.size(); ++i) CHECK(back.daily[i].probs == profile.daily[i].probs);
  CHECK(serialize_profile(back) == text);
}

TEST_CASE("malformed profile documents") {
  CHECK_THROWS_AS(deserialize_profile("not json"), Error);
  CHECK_THROWS_AS(deserialize_profile(R"({"format":"playtime.churner_profile","version":99})"), Error);
  CHECK_THROWS_AS(deserialize_profile(R"({"format":"other","version":1})"), Error);
}
