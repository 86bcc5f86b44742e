// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "playtime/classifiers.hpp"
#include "playtime/cli.hpp"
#include "playtime/distributions.hpp"
#include "playtime/entropy.hpp"
#include "playtime/evaluation.hpp"
#include "playtime/synthgen.hpp"
#include "test_support.hpp"

using namespace playtime;
using playtime::testing::random_probs;
using playtime::testing::random_window;

namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Distribution dist(const std::vector<double>& v) { return {1, std::nullopt, vec(v), 1.0}; }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome entropy_suite() {
  Outcome o;
  const auto start = Clock::now();
  const EntropyConfig raw{2.0, 0.0};
  for (int q : {2, 3, 5, 7, 15}) {
    const std::vector<double> uniform(static_cast<std::size_t>(q), 1.0 / q);
    const double h = entropy(dist(uniform), raw);
    o.require(std::abs(h - std::log2(static_cast<double>(q))) <= 1e-12,
              "H(uniform " + std::to_string(q) + ") off by " + std::to_string(h - std::log2(q)));
  }
  std::mt19937_64 rng(2024);
  double worst_self = 0.0;
  double worst_gibbs = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const int k = 2 + static_cast<int>(rng() % 14);
    const auto p = dist(random_probs(rng, k, true));
    const auto q = dist(random_probs(rng, k, false));
    const double h = entropy(p, raw);
    worst_self = std::max(worst_self, std::abs(cross_entropy(p, p, raw) - h));
    worst_gibbs = std::max(worst_gibbs, h - cross_entropy(p, q, raw));
  }
  o.require(worst_self <= 1e-12, fmt("H(p,p) - H(p) reached %.3g", worst_self));
  o.require(worst_gibbs <= 1e-9, fmt("Gibbs violated by %.3g", worst_gibbs));
  const double t = seconds_since(start);
  o.require(t < 5.0, fmt("took %.2f s", t));
  if (o.pass) {
    o.detail = fmt("max |H(p,p)-H(p)| = %.2g, max Gibbs slack violation = %.2g, %.2f s", worst_self,
                   std::max(0.0, worst_gibbs), t);
  }
  return o;
}

Outcome distribution_oracle() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(77);
  double worst = 0.0;
  double worst_sum = 0.0;
  std::vector<PlayerWindow> batch;
  auto check_dist = [&](const Distribution& got, const std::vector<double>& num, double den) {
    if ((den == 0.0) != got.empty()) {
      worst = INFINITY;
      return;
    }
    if (den == 0.0) return;
    double sum = 0.0;
    for (std::size_t d = 0; d < num.size(); ++d) {
      worst = std::max(worst, std::abs(got.probs(static_cast<Eigen::Index>(d)) - num[d] / den));
      sum += got.probs(static_cast<Eigen::Index>(d));
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  };
  // Naive loops over the raw matrix, independent of the Eigen block code.
  auto naive = [](const std::vector<PlayerWindow>& ws, const PeriodScheme& s, int k,
                  int slot /* 0 = daily */) {
    const int len = s.days() / s.periods();
    std::vector<double> num(static_cast<std::size_t>(len), 0.0);
    double den = 0.0;
    for (const auto& w : ws) {
      for (int i = 0; i < len; ++i) {
        const int row = (k - 1) * len + i;
        for (int r = 0; r < kSlotsPerDay; ++r) {
          if (slot != 0 && r != slot - 1) continue;
          num[static_cast<std::size_t>(i)] += w.playtime(row, r);
          den += w.playtime(row, r);
        }
      }
    }
    return std::pair{num, den};
  };
  for (int i = 0; i < 1000; ++i) {
    const int m = std::array{1, 3, 5, 15}[rng() % 4];
    const PeriodScheme scheme(15, m);
    auto w = random_window(rng, 15);
    if (rng() % 4 == 0) w.playtime.topRows(5).setZero();
    for (int k = 1; k <= m; ++k) {
      const std::vector<PlayerWindow> one{w};
      auto [num, den] = naive(one, scheme, k, 0);
      check_dist(daily_individual(w, scheme, k), num, den);
      for (int r = 1; r <= kSlotsPerDay; ++r) {
        auto [hn, hd] = naive(one, scheme, k, r);
        check_dist(hourly_individual(w, scheme, k, r), hn, hd);
      }
    }
    batch.push_back(std::move(w));
    if (batch.size() == 5) {
      const PeriodScheme pooled(15, 5);
      const auto profile = build_global_profile(batch, pooled);
      for (int k = 1; k <= 5; ++k) {
        auto [num, den] = naive(batch, pooled, k, 0);
        check_dist(profile.daily_at(k), num, den);
        for (int r = 1; r <= kSlotsPerDay; ++r) {
          auto [hn, hd] = naive(batch, pooled, k, r);
          check_dist(profile.hourly_at(k, r), hn, hd);
        }
      }
      batch.clear();
    }
  }
  o.require(worst <= 1e-12, fmt("max deviation from oracle %.3g", worst));
  o.require(worst_sum <= 1e-9, fmt("max |sum - 1| = %.3g", worst_sum));
  const double t = seconds_since(start);
  o.require(t < 10.0, fmt("took %.2f s", t));
  if (o.pass) {
    o.detail = fmt("1000 windows + 200 pooled profiles, max deviation %.2g, max |sum-1| %.2g, %.2f s",
                   worst, worst_sum, t);
  }
  return o;
}

Outcome worked_examples() {
  Outcome o;
  PlayerWindow w{"u", Date::from_ymd(2018, 12, 3), PlaytimeMatrix::Zero(3, kSlotsPerDay)};
  // Day totals 5, 6 and 8 hours, spread over several slots.
  w.playtime.row(0).head(5).setOnes();
  w.playtime.row(1).head(6).setOnes();
  w.playtime.row(2).head(8).setOnes();
  const auto daily = daily_individual(w, PeriodScheme(3, 1), 1);
  o.require(daily.probs(0) == 5.0 / 19 && daily.probs(1) == 6.0 / 19 && daily.probs(2) == 8.0 / 19,
            "daily example differs from 5/19, 6/19, 8/19");

  PlayerWindow h{"u", Date::from_ymd(2018, 12, 3), PlaytimeMatrix::Zero(3, kSlotsPerDay)};
  h.playtime(0, 8) = 0.1;
  h.playtime(1, 8) = 0.2;
  h.playtime(2, 8) = 0.3;
  const auto hourly = hourly_individual(h, PeriodScheme(3, 1), 1, 9);
  // 0.1 + 0.2 + 0.3 is not exactly 0.6 in binary, so "exact" means the
  // closest doubles up to one rounding step.
  auto close = [](double a, double b) { return std::abs(a - b) <= 2 * std::numeric_limits<double>::epsilon() * b; };
  o.require(close(hourly.probs(0), 1.0 / 6) && close(hourly.probs(1), 1.0 / 3) &&
                close(hourly.probs(2), 1.0 / 2),
            "hourly example differs from 1/6, 1/3, 1/2");

  const auto parts = partition_periods(PeriodScheme(15, 5));
  o.require(parts.size() == 5 && parts[0] == std::vector<int>{1, 2, 3} &&
                parts[1] == std::vector<int>{4, 5, 6} && parts[4] == std::vector<int>{13, 14, 15},
            "partition example differs");
  if (o.pass) o.detail = "5,6,8 -> 5/19,6/19,8/19; 0.1,0.2,0.3 -> 1/6,1/3,1/2; D1={1,2,3}, D2={4,5,6}";
  return o;
}

Outcome auc_exactness() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(500);
  int discrepancies = 0;
  for (int set = 0; set < 500; ++set) {
    const int n = 2 + static_cast<int>(rng() % 199);
    const int levels = 1 + static_cast<int>(rng() % 30);
    std::vector<double> s(static_cast<std::size_t>(n));
    std::vector<int> y(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = static_cast<double>(rng() % static_cast<unsigned>(levels));
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 1;
    y[1] = 0;
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (y[i] != 1 || y[j] != 0) continue;
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
    }
    if (auc(s, y) != wins / pairs) ++discrepancies;
  }
  o.require(discrepancies == 0, std::to_string(discrepancies) + " sets disagree with the oracle");
  const std::vector<double> sep{0.9, 0.8, 0.2, 0.1};
  const std::vector<int> lab{1, 1, 0, 0};
  o.require(auc(sep, lab) == 1.0, "perfect separation is not 1");
  const std::vector<double> ties(4, 0.5);
  o.require(auc(ties, lab) == 0.5, "all ties is not 0.5");
  const double t = seconds_since(start);
  o.require(t < 10.0, fmt("took %.2f s", t));
  if (o.pass) o.detail = fmt("500 sets, 0 discrepancies, separation 1.0, ties 0.5, %.2f s", t);
  return o;
}

Outcome classifier_numerics() {
  Outcome o;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int problem = 0; problem < 50; ++problem) {
    const int rows = 5 + static_cast<int>(rng() % 30);
    const int cols = 1 + static_cast<int>(rng() % 6);
    Eigen::MatrixXd z = Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return normal(rng); });
    std::vector<int> y(static_cast<std::size_t>(rows));
    for (auto& v : y) v = static_cast<int>(rng() % 2);
    LinearModel m{Eigen::VectorXd::NullaryExpr(cols, [&] { return normal(rng); }), normal(rng)};
    const double l2 = 0.01 * static_cast<double>(rng() % 10);
    const auto g = logistic_gradient(z, y, m, l2);
    const double h = 1e-6;
    for (int j = 0; j <= cols; ++j) {
      auto plus = m;
      auto minus = m;
      (j < cols ? plus.weights(j) : plus.bias) += h;
      (j < cols ? minus.weights(j) : minus.bias) -= h;
      const double fd = (logistic_loss(z, y, plus, l2) - logistic_loss(z, y, minus, l2)) / (2 * h);
      const double an = j < cols ? g.weights(j) : g.bias;
      // Relative error, guarded against vanishing gradients.
      worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-3));
    }
  }
  o.require(worst <= 1e-5, fmt("max relative gradient error %.3g", worst));

  bool monotone = true;
  for (int seed = 0; seed < 5; ++seed) {
    std::mt19937_64 r(static_cast<std::uint64_t>(seed));
    Eigen::MatrixXd z = Eigen::MatrixXd::NullaryExpr(80, 6, [&] { return normal(r); });
    std::vector<int> y(80);
    for (int i = 0; i < 80; ++i) y[static_cast<std::size_t>(i)] = z(i, 0) + 0.5 * normal(r) > 0 ? 1 : 0;
    std::vector<double> trace;
    fit_logistic(z, y, 1e-3, 1e-3, 500, &trace);
    for (std::size_t i = 1; i < trace.size(); ++i) monotone = monotone && trace[i] <= trace[i - 1];
  }
  o.require(monotone, "LR loss increased at lr = 1e-3");

  bool identical = true;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(150, 8, [&] { return normal(rng); });
    std::vector<int> y(150);
    for (int i = 0; i < 150; ++i) y[static_cast<std::size_t>(i)] = x(i, 0) + x(i, 1) + normal(rng) > 0;
    TrainConfig dt;
    dt.algorithm = Algorithm::DecisionTree;
    dt.rng_seed = static_cast<std::uint64_t>(trial);
    TrainConfig rf = dt;
    rf.algorithm = Algorithm::RandomForest;
    rf.n_trees = 1;
    rf.bootstrap = false;
    rf.feature_subsample = 1.0;
    identical = identical && score(train(x, y, dt), x) == score(train(x, y, rf), x);
  }
  o.require(identical, "single-tree forest differs from the tree");
  if (o.pass) {
    o.detail = fmt("max gradient rel. error %.2g over 50 problems; loss monotone; RF(1 tree) == DT", worst);
  }
  return o;
}

std::vector<std::pair<std::string, bool>> as_pairs(const std::vector<ChurnLabel>& labels) {
  std::vector<std::pair<std::string, bool>> out;
  for (const auto& l : labels) out.emplace_back(l.player_id, l.is_churner);
  return out;
}

double cell(const ExperimentGrid& grid, FeatureType type, Algorithm a) {
  for (const auto& c : grid.cells) {
    if (c.feature_type == type && c.algorithm == a) return c.auc;
  }
  return NAN;
}

Outcome end_to_end() {
  Outcome o;
  const auto start = Clock::now();
  std::string summary;
  for (std::uint64_t seed : {42, 43, 44}) {
    PopulationConfig pop_cfg;  // 2000 players, alpha_nc 8, alpha_c 0.8, decay 0.75
    pop_cfg.rng_seed = seed;
    const auto pop = generate(pop_cfg);

    GridConfig cfg;
    cfg.m_list = {5};
    cfg.feature_types = {FeatureType::Proposed1, FeatureType::ProposedCombined, FeatureType::BaselineRaw};
    cfg.algorithms = {Algorithm::RandomForest};
    cfg.curves = false;
    cfg.seed = seed;
    const auto grid = run_grid(pop.records, as_pairs(pop.labels), cfg);
    const double combined = cell(grid, FeatureType::ProposedCombined, Algorithm::RandomForest);
    const double raw = cell(grid, FeatureType::BaselineRaw, Algorithm::RandomForest);
    const double p1 = cell(grid, FeatureType::Proposed1, Algorithm::RandomForest);
    o.require(combined >= raw + 0.03,
              fmt("seed %.0f: combined %.3f < raw %.3f + 0.03", static_cast<double>(seed), combined, raw));
    o.require(p1 > 0.6, fmt("seed %.0f: proposed1 %.3f", static_cast<double>(seed), p1));

    // Mean daily entropy per period over the whole population.
    std::vector<std::string> ids;
    for (const auto& l : pop.labels) ids.push_back(l.player_id);
    const auto windows = build_windows(pop.records, ids, 15);
    const PeriodScheme scheme(15, 5);
    std::vector<double> churn(5, 0.0), other(5, 0.0);
    double nc = 0, no = 0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      const bool c = pop.labels[i].is_churner;
      (c ? nc : no) += 1;
      for (int k = 1; k <= 5; ++k) {
        const auto d = daily_individual(windows[i], scheme, k);
        (c ? churn : other)[static_cast<std::size_t>(k - 1)] += d.empty() ? 0.0 : entropy(d, EntropyConfig{});
      }
    }
    for (int k = 0; k < 5; ++k) {
      const double hc = churn[static_cast<std::size_t>(k)] / nc;
      const double hn = other[static_cast<std::size_t>(k)] / no;
      o.require(hn > hc, fmt("seed %.0f: period %.0f non-churner entropy not above churners",
                             static_cast<double>(seed), k + 1.0));
    }
    summary += fmt("seed %.0f: combined %.3f raw %.3f", static_cast<double>(seed), combined, raw) +
               fmt(" p1 %.3f; ", p1);
  }
  const double t = seconds_since(start);
  o.require(t < 120.0, fmt("took %.1f s", t));
  if (o.pass) o.detail = summary + fmt("entropy gap holds in all periods, %.1f s", t);
  return o;
}

Outcome null_data() {
  Outcome o;
  const auto start = Clock::now();
  double lo = 1.0;
  double hi = 0.0;
  int cells = 0;
  for (std::uint64_t seed : {42, 43, 44}) {
    PopulationConfig pop_cfg;
    pop_cfg.churner_decay = 1.0;
    pop_cfg.churner_day_concentration = pop_cfg.nonchurner_day_concentration;
    pop_cfg.rng_seed = seed;
    const auto pop = generate(pop_cfg);
    GridConfig cfg;
    cfg.curves = false;
    cfg.seed = seed;
    const auto grid = run_grid(pop.records, as_pairs(pop.labels), cfg);
    for (const auto& c : grid.cells) {
      lo = std::min(lo, c.auc);
      hi = std::max(hi, c.auc);
      ++cells;
      o.require(c.auc >= 0.45 && c.auc <= 0.55,
                "seed " + std::to_string(seed) + " " + std::string(to_string(c.feature_type)) +
                    (c.m ? " m=" + std::to_string(*c.m) : std::string()) + " " +
                    std::string(to_string(c.algorithm)) + fmt(" AUC %.3f", c.auc));
    }
  }
  o.require(cells == 180, "expected 180 cells, got " + std::to_string(cells));
  const double t = seconds_since(start);
  o.require(t < 120.0, fmt("took %.1f s", t));
  if (o.pass) o.detail = fmt("180 cells in [%.3f, %.3f], %.1f s", lo, hi, t);
  return o;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const auto root = fs::temp_directory_path() / "playtime_acceptance_determinism";
  fs::remove_all(root);
  std::ostringstream sink;
  auto cli = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "playtime-churn");
    return cli::run(args, sink, sink);
  };
  o.require(cli({"synth", "-o", (root / "data").string(), "--seed", "42"}) == 0, "synth failed");
  auto evaluate = [&](const std::string& name, const std::string& threads) {
    const auto out = root / name;
    o.require(cli({"evaluate", "-i", (root / "data" / "records.csv").string(), "-l",
                   (root / "data" / "labels.csv").string(), "-o", out.string(), "--seed", "42",
                   "--threads", threads, "--no-timestamp"}) == 0,
              "evaluate failed");
    return slurp(out / "grid.csv");
  };
  const auto first = evaluate("run1", "1");
  const auto second = evaluate("run2", "1");
  const auto eight = evaluate("run8", "8");
  o.require(!first.empty(), "empty grid");
  o.require(first == second, "repeated runs differ");
  o.require(first == eight, "--threads 1 and --threads 8 differ");
  if (o.pass) o.detail = "grid.csv byte-identical across two runs and across --threads 1/8";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"entropy-suite", entropy_suite},
      {"distribution-oracle", distribution_oracle},
      {"worked-examples", worked_examples},
      {"auc-exactness", auc_exactness},
      {"classifier-numerics", classifier_numerics},
      {"end-to-end-synthetic", end_to_end},
      {"null-data", null_data},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failed += outcome.pass ? 0 : 1;
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << ": " << outcome.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed;
}
