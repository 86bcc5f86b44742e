#include "playtime/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "playtime/error.hpp"
#include "playtime/ingest.hpp"
#include "playtime/parallel.hpp"

namespace playtime {
namespace {

LabelSet sorted_unique(std::span<const std::pair<std::string, bool>> labels) {
  LabelSet out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const auto& a, const auto& b) { return a.first == b.first; }),
            out.end());
  return out;
}

std::pair<LabelSet, LabelSet> by_class(const LabelSet& labels) {
  LabelSet churners;
  LabelSet others;
  for (const auto& entry : labels) (entry.second ? churners : others).push_back(entry);
  return {std::move(churners), std::move(others)};
}

void sort_by_id(LabelSet& labels) {
  std::sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
}

std::vector<int> to_ints(const LabelSet& labels) {
  std::vector<int> y;
  y.reserve(labels.size());
  for (const auto& entry : labels) y.push_back(entry.second ? 1 : 0);
  return y;
}

std::vector<PlayerWindow> latest_days(std::span<const PlayerWindow> windows, int days) {
  std::vector<PlayerWindow> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(w.latest(days));
  return out;
}

// Keeps the static (non-rate) columns of a feature matrix whose names start
// with `prefix`.
std::pair<Eigen::MatrixXd, std::vector<std::string>> static_columns(const FeatureMatrix& features,
                                                                    const std::string& prefix) {
  std::vector<Eigen::Index> cols;
  std::vector<std::string> axis;
  for (std::size_t j = 0; j < features.names.size(); ++j) {
    const auto& name = features.names[j];
    if (name.rfind(prefix, 0) == 0 && name.find(".rate.") == std::string::npos) {
      cols.push_back(static_cast<Eigen::Index>(j));
      axis.push_back(name.substr(prefix.size()));
    }
  }
  Eigen::MatrixXd values(features.values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    values.col(static_cast<Eigen::Index>(c)) = features.values.col(cols[c]);
  }
  return {std::move(values), std::move(axis)};
}

double cell_auc(const FeatureMatrix& train_x, std::span<const int> train_y,
                const FeatureMatrix& test_x, std::span<const int> test_y, TrainConfig cfg,
                Algorithm algorithm) {
  cfg.algorithm = algorithm;
  const TrainedModel model = train(train_x.values, train_y, cfg);
  const Eigen::VectorXd scores = score(model, test_x.values);
  return auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), test_y);
}

std::string format_auc(double value) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  return buf;
}

}  // namespace

GridSeeds GridSeeds::from(std::uint64_t seed) {
  return {mix_seed(seed, 1), mix_seed(seed, 2), mix_seed(seed, 3)};
}

LabelSet balanced_sample(std::span<const std::pair<std::string, bool>> labels,
                         std::uint64_t rng_seed) {
  auto [churners, others] = by_class(sorted_unique(labels));
  if (churners.empty() || others.empty()) {
    throw Error(ErrorCode::DegenerateLabels, "balanced sampling needs both churners and non-churners");
  }
  const std::size_t per_class = std::min(churners.size(), others.size());
  std::mt19937_64 rng(rng_seed);
  LabelSet out;
  for (auto* group : {&churners, &others}) {
    if (group->size() > per_class) std::shuffle(group->begin(), group->end(), rng);
    out.insert(out.end(), group->begin(), group->begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  sort_by_id(out);
  return out;
}

TrainTestSplit split_train_test(std::span<const std::pair<std::string, bool>> labels,
                                std::uint64_t rng_seed) {
  auto [churners, others] = by_class(sorted_unique(labels));
  if (churners.size() < 2 || others.size() < 2) {
    throw Error(ErrorCode::DegenerateLabels, "splitting needs at least two players of each class");
  }
  std::mt19937_64 rng(rng_seed);
  TrainTestSplit split;
  for (auto* group : {&churners, &others}) {
    std::shuffle(group->begin(), group->end(), rng);
    const auto train_size = static_cast<std::ptrdiff_t>((group->size() + 1) / 2);
    split.train.insert(split.train.end(), group->begin(), group->begin() + train_size);
    split.test.insert(split.test.end(), group->begin() + train_size, group->end());
  }
  sort_by_id(split.train);
  sort_by_id(split.test);
  return split;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scores and labels differ in length");
  }
  const auto n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorCode::InvalidInput, "non-finite score");
  }
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  double positives = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        positive_rank_sum += midrank;
        positives += 1.0;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw Error(ErrorCode::DegenerateLabels, "AUC needs both positive and negative labels");
  }
  return (positive_rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

std::vector<CurveSummary> curve_summary(const Eigen::MatrixXd& values, std::span<const int> labels,
                                        std::span<const std::string> axis) {
  if (static_cast<std::size_t>(values.rows()) != labels.size() ||
      static_cast<std::size_t>(values.cols()) != axis.size()) {
    throw Error(ErrorCode::DimensionMismatch, "curve values do not match labels or axis");
  }
  std::vector<CurveSummary> out;
  for (const auto& [group, label] : {std::pair{"churner", 1}, std::pair{"nonchurner", 0}}) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) rows.push_back(static_cast<Eigen::Index>(i));
    }
    for (std::size_t a = 0; a < axis.size(); ++a) {
      CurveSummary s{group, axis[a], 0.0, std::nullopt, static_cast<int>(rows.size())};
      if (rows.empty()) {
        out.push_back(std::move(s));
        continue;
      }
      double sum = 0.0;
      for (auto r : rows) sum += values(r, static_cast<Eigen::Index>(a));
      s.mean = sum / static_cast<double>(rows.size());
      if (rows.size() > 1) {
        double squares = 0.0;
        for (auto r : rows) {
          const double d = values(r, static_cast<Eigen::Index>(a)) - s.mean;
          squares += d * d;
        }
        const double sd = std::sqrt(squares / static_cast<double>(rows.size() - 1));
        s.ci_halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(rows.size()));
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

void GridConfig::validate() const {
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "n must be positive");
  if (m_list.empty() && std::none_of(feature_types.begin(), feature_types.end(), is_baseline)) {
    throw Error(ErrorCode::InvalidConfig, "nothing to evaluate");
  }
  int max_period = 1;
  for (int m : m_list) {
    if (m < 1 || m > n) {
      throw Error(ErrorCode::InvalidConfig,
                  "m=" + std::to_string(m) + " must lie in 1.." + std::to_string(n));
    }
    max_period = std::max(max_period, n / m);
  }
  if (algorithms.empty()) throw Error(ErrorCode::InvalidConfig, "no algorithms selected");
  if (feature_types.empty()) throw Error(ErrorCode::InvalidConfig, "no feature types selected");
  if (min_days < 1) throw Error(ErrorCode::InvalidConfig, "min_days must be positive");
  entropy.validate(max_period);
  train.validate();
}

PreparedDataset prepare_dataset(std::span<const PlaytimeRecord> records,
                                std::span<const std::pair<std::string, bool>> labels, int n,
                                int min_days, std::uint64_t seed, unsigned threads) {
  const GridSeeds seeds = GridSeeds::from(seed);
  const auto long_term = filter_long_term(records, min_days);
  LabelSet eligible;
  for (const auto& entry : sorted_unique(labels)) {
    if (long_term.contains(entry.first)) eligible.push_back(entry);
  }
  PreparedDataset data;
  data.split = split_train_test(balanced_sample(eligible, seeds.balance), seeds.split);
  data.train_y = to_ints(data.split.train);
  data.test_y = to_ints(data.split.test);
  std::vector<std::string> ids;
  for (const auto* part : {&data.split.train, &data.split.test}) {
    for (const auto& entry : *part) ids.push_back(entry.first);
  }
  auto windows = build_windows(records, ids, n, threads);
  const auto train_count = static_cast<std::ptrdiff_t>(data.split.train.size());
  data.train_windows.assign(std::make_move_iterator(windows.begin()),
                            std::make_move_iterator(windows.begin() + train_count));
  data.test_windows.assign(std::make_move_iterator(windows.begin() + train_count),
                           std::make_move_iterator(windows.end()));
  return data;
}

ExperimentGrid run_grid(std::span<const PlaytimeRecord> records,
                        std::span<const std::pair<std::string, bool>> labels,
                        const GridConfig& cfg) {
  cfg.validate();
  const GridSeeds seeds = GridSeeds::from(cfg.seed);
  const auto data = prepare_dataset(records, labels, cfg.n, cfg.min_days, cfg.seed, cfg.threads);
  const auto& train_y = data.train_y;
  const auto& test_y = data.test_y;
  const std::span<const PlayerWindow> train_windows(data.train_windows);
  const std::span<const PlayerWindow> test_windows(data.test_windows);

  TrainConfig train_cfg = cfg.train;
  train_cfg.rng_seed = seeds.train;
  train_cfg.threads = cfg.threads;

  ExperimentGrid grid;
  auto evaluate = [&](const FeatureMatrix& train_x, const FeatureMatrix& test_x,
                      std::optional<int> m) {
    for (auto algorithm : cfg.algorithms) {
      grid.cells.push_back({cfg.dataset, train_x.feature_type, m, algorithm,
                            cell_auc(train_x, train_y, test_x, test_y, train_cfg, algorithm)});
    }
  };

  for (int m : cfg.m_list) {
    const auto scheme = PeriodScheme::fitted(cfg.n, m);
    const auto train_m = latest_days(train_windows, scheme.days());
    const auto test_m = latest_days(test_windows, scheme.days());
    std::vector<PlayerWindow> churners;
    for (std::size_t i = 0; i < train_m.size(); ++i) {
      if (train_y[i] == 1) churners.push_back(train_m[i]);
    }
    const auto profile = build_global_profile(churners, scheme);
    for (auto type : cfg.feature_types) {
      if (is_baseline(type)) continue;
      evaluate(extract_features(train_m, &profile, scheme, cfg.entropy, type, cfg.threads),
               extract_features(test_m, &profile, scheme, cfg.entropy, type, cfg.threads), m);
    }
    if (cfg.curves) {
      const auto statics = extract_features(train_m, &profile, scheme, cfg.entropy,
                                            FeatureType::ProposedCombined, cfg.threads);
      const std::string suffix = "_m" + std::to_string(m);
      for (const auto& [name, prefix] : {std::pair{"daily_entropy", "dailyH."},
                                         std::pair{"hourly_entropy", "hourlyH."},
                                         std::pair{"hourly_cross_entropy", "xent."}}) {
        const auto [values, axis] = static_columns(statics, prefix);
        grid.curves[name + suffix] = curve_summary(values, train_y, axis);
      }
    }
  }

  const PeriodScheme full(cfg.n, 1);
  for (auto type : cfg.feature_types) {
    if (!is_baseline(type)) continue;
    evaluate(extract_features(train_windows, nullptr, full, cfg.entropy, type, cfg.threads),
             extract_features(test_windows, nullptr, full, cfg.entropy, type, cfg.threads),
             std::nullopt);
  }
  flag_best(grid);
  return grid;
}

void flag_best(ExperimentGrid& grid) {
  std::map<std::string, std::size_t> best;
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    auto& cell = grid.cells[i];
    cell.best = false;
    auto [it, inserted] = best.emplace(cell.dataset, i);
    if (!inserted && cell.auc > grid.cells[it->second].auc) it->second = i;
  }
  for (const auto& [dataset, index] : best) grid.cells[index].best = true;
}

void write_grid_csv(std::ostream& out, const ExperimentGrid& grid) {
  out << "dataset,feature_type,m,algorithm,auc\n";
  for (const auto& cell : grid.cells) {
    out << cell.dataset << ',' << to_string(cell.feature_type) << ','
        << (cell.m ? std::to_string(*cell.m) : std::string("-")) << ','
        << to_string(cell.algorithm) << ',' << format_double(cell.auc) << '\n';
  }
}

ExperimentGrid read_grid_csv(std::istream& in) {
  ExperimentGrid grid;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::InvalidInput, "grid CSV line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "dataset,feature_type,m,algorithm,auc") fail("unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string field; std::getline(ss, field, ',');) f.push_back(field);
    if (f.size() != 5) fail("expected 5 fields");
    GridCell cell;
    cell.dataset = f[0];
    const auto type = parse_feature_type(f[1]);
    if (!type) fail("unknown feature type '" + f[1] + "'");
    cell.feature_type = *type;
    if (f[2] != "-") {
      int m = 0;
      auto [p, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), m);
      if (ec != std::errc{} || p != f[2].data() + f[2].size()) fail("bad m '" + f[2] + "'");
      cell.m = m;
    }
    const auto algorithm = parse_algorithm(f[3]);
    if (!algorithm) fail("unknown algorithm '" + f[3] + "'");
    cell.algorithm = *algorithm;
    auto [p, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), cell.auc);
    if (ec != std::errc{} || p != f[4].data() + f[4].size() || !(cell.auc >= 0.0 && cell.auc <= 1.0)) {
      fail("bad auc '" + f[4] + "'");
    }
    grid.cells.push_back(std::move(cell));
  }
  if (line_no == 0) throw Error(ErrorCode::InvalidInput, "empty grid CSV");
  flag_best(grid);
  return grid;
}

void write_grid_table(std::ostream& out, const ExperimentGrid& grid) {
  std::vector<std::string> datasets;
  std::set<int> m_values;
  std::vector<Algorithm> algorithms;
  for (const auto& cell : grid.cells) {
    if (std::find(datasets.begin(), datasets.end(), cell.dataset) == datasets.end()) {
      datasets.push_back(cell.dataset);
    }
    if (cell.m) m_values.insert(*cell.m);
    if (std::find(algorithms.begin(), algorithms.end(), cell.algorithm) == algorithms.end()) {
      algorithms.push_back(cell.algorithm);
    }
  }
  std::sort(algorithms.begin(), algorithms.end());
  // Baselines do not depend on m; they fill the first m block only.
  std::vector<std::optional<int>> blocks(m_values.begin(), m_values.end());
  if (blocks.empty()) blocks.push_back(std::nullopt);
  const int label_width = 12;
  const int cell_width = 8;

  for (const auto& dataset : datasets) {
    out << "Dataset: " << dataset << '\n';
    std::string header(label_width, ' ');
    std::string sub(label_width, ' ');
    for (const auto& block : blocks) {
      std::string title = block ? "m=" + std::to_string(*block) : "all";
      const auto width = static_cast<std::size_t>(cell_width) * algorithms.size();
      title.resize(std::max(title.size(), width), ' ');
      header += " | " + title;
      std::string names;
      for (auto a : algorithms) {
        std::string col(to_string(a));
        col.resize(cell_width, ' ');
        names += col;
      }
      sub += " | " + names;
    }
    out << header << '\n' << sub << '\n';
    std::vector<FeatureType> rows;
    for (const auto& cell : grid.cells) {
      if (cell.dataset == dataset &&
          std::find(rows.begin(), rows.end(), cell.feature_type) == rows.end()) {
        rows.push_back(cell.feature_type);
      }
    }
    for (auto type : rows) {
      std::string line(to_string(type));
      line.resize(label_width, ' ');
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        line += " | ";
        for (auto a : algorithms) {
          std::string text;
          for (const auto& cell : grid.cells) {
            const bool in_block = is_baseline(type) ? b == 0 : cell.m == blocks[b];
            if (cell.dataset == dataset && cell.feature_type == type && cell.algorithm == a &&
                in_block) {
              text = format_auc(cell.auc) + (cell.best ? "*" : "");
            }
          }
          text.resize(cell_width, ' ');
          line += text;
        }
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out << line << '\n';
    }
    out << '\n';
  }
  out << "* highest AUC per dataset; baselines are independent of m\n";
}

void write_curves_csv(std::ostream& out, std::span<const CurveSummary> curves) {
  out << "group,axis,mean,ci,count\n";
  for (const auto& c : curves) {
    out << c.group << ',' << c.axis << ',' << format_double(c.mean) << ','
        << (c.ci_halfwidth ? format_double(*c.ci_halfwidth) : std::string()) << ',' << c.count
        << '\n';
  }
}

}  // namespace playtime
