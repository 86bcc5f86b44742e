#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "playtime/classifiers.hpp"
#include "playtime/core_model.hpp"
#include "playtime/entropy.hpp"
#include "playtime/features.hpp"

namespace playtime {

/// (player_id, is_churner) pairs.
using LabelSet = std::vector<std::pair<std::string, bool>>;

/// Equal numbers of churners and non-churners, 2 * min(class sizes) in
/// total, sorted by player id. Independent of input order.
LabelSet balanced_sample(std::span<const std::pair<std::string, bool>> labels,
                         std::uint64_t rng_seed);

struct TrainTestSplit {
  LabelSet train;
  LabelSet test;
};

/// Stratified half split. Each class sends ceil(size/2) members to train.
TrainTestSplit split_train_test(std::span<const std::pair<std::string, bool>> labels,
                                std::uint64_t rng_seed);

/// Mann-Whitney AUC via midranks: P(pos > neg) + P(tie)/2. Labels are 0/1.
/// Throws DegenerateLabels if a class is missing, InvalidInput for
/// non-finite scores.
double auc(std::span<const double> scores, std::span<const int> labels);

struct CurveSummary {
  std::string group;  // "churner" or "nonchurner"
  std::string axis;   // period or period/slot label
  double mean = 0.0;
  std::optional<double> ci_halfwidth;  // 1.96 s / sqrt(count); unset when count < 2
  int count = 0;
};

/// Per-axis mean and 95% normal-approximation half width for each group.
/// `values` has one row per player and one column per axis point.
std::vector<CurveSummary> curve_summary(const Eigen::MatrixXd& values, std::span<const int> labels,
                                        std::span<const std::string> axis);

struct GridCell {
  std::string dataset;
  FeatureType feature_type = FeatureType::Proposed1;
  std::optional<int> m;  // unset for baselines
  Algorithm algorithm = Algorithm::LogisticRegression;
  double auc = 0.0;
  bool best = false;
};

struct ExperimentGrid {
  std::vector<GridCell> cells;
  /// Named curve summaries from the training split, e.g. "daily_entropy_m5".
  std::map<std::string, std::vector<CurveSummary>> curves;
};

struct GridConfig {
  std::string dataset = "dataset";
  int n = 15;
  std::vector<int> m_list{2, 3, 5};
  std::vector<FeatureType> feature_types{
      FeatureType::Proposed1,   FeatureType::Proposed2, FeatureType::Proposed3,
      FeatureType::ProposedCombined, FeatureType::BaselineRaw, FeatureType::Baseline1,
      FeatureType::Baseline2};
  std::vector<Algorithm> algorithms{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
  EntropyConfig entropy;
  TrainConfig train;  // algorithm is overridden per cell
  int min_days = 15;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool curves = true;

  void validate() const;
};

/// Long-term, labeled players after balancing and splitting, with their
/// n-day windows (train rows first, each part sorted by player id).
struct PreparedDataset {
  TrainTestSplit split;
  std::vector<PlayerWindow> train_windows;
  std::vector<PlayerWindow> test_windows;
  std::vector<int> train_y;
  std::vector<int> test_y;
};

PreparedDataset prepare_dataset(std::span<const PlaytimeRecord> records,
                                std::span<const std::pair<std::string, bool>> labels, int n,
                                int min_days, std::uint64_t seed, unsigned threads = 1);

/// Long-term filter, balance, split, then for each m: churner profile from
/// the training churners, features, training and test AUC. Baselines are
/// evaluated once. Periods of non-divisible m use the latest m*floor(n/m) days.
ExperimentGrid run_grid(std::span<const PlaytimeRecord> records,
                        std::span<const std::pair<std::string, bool>> labels,
                        const GridConfig& cfg);

/// Seeds used by run_grid for its random stages.
struct GridSeeds {
  std::uint64_t balance;
  std::uint64_t split;
  std::uint64_t train;
  static GridSeeds from(std::uint64_t seed);
};

void write_grid_csv(std::ostream& out, const ExperimentGrid& grid);
/// Reads a CSV written by write_grid_csv and recomputes the best flags.
/// Throws Error(InvalidInput).
ExperimentGrid read_grid_csv(std::istream& in);
/// Text table, one block per dataset: feature rows, (m, algorithm) columns,
/// best cell starred.
void write_grid_table(std::ostream& out, const ExperimentGrid& grid);
void write_curves_csv(std::ostream& out, std::span<const CurveSummary> curves);

/// Marks the highest-AUC cell of every dataset; the first one wins ties.
void flag_best(ExperimentGrid& grid);

}  // namespace playtime
