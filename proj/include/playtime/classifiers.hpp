#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "playtime/features.hpp"

namespace playtime {

enum class Algorithm { LogisticRegression, LinearSVM, DecisionTree, RandomForest };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::LogisticRegression, Algorithm::LinearSVM,
                                               Algorithm::DecisionTree, Algorithm::RandomForest};

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view text);

struct TrainConfig {
  Algorithm algorithm = Algorithm::LogisticRegression;
  double learning_rate = 0.1;  // LR, SVM
  double l2_penalty = 1e-3;    // LR, SVM
  int epochs = 200;            // LR, SVM
  int max_depth = 8;           // trees
  int min_leaf = 5;            // trees
  int n_trees = 100;           // RF
  /// Fraction of features tried per split (RF). Unset means sqrt(p)/p.
  std::optional<double> feature_subsample;
  /// RF only; false trains every tree on the full training set in order.
  bool bootstrap = true;
  std::uint64_t rng_seed = 0;
  /// Worker cap for forest training. Never affects results.
  unsigned threads = 1;

  void validate() const;
  /// FNV-1a over every result-affecting field.
  [[nodiscard]] std::uint64_t hash() const;
};

/// Per-feature z-scoring fitted on training rows. Columns whose spread is
/// numerically zero are dropped and recorded.
struct Standardizer {
  Eigen::Index input_dim = 0;
  std::vector<Eigen::Index> kept;
  std::vector<Eigen::Index> dropped;
  Eigen::VectorXd mean;   // over kept columns
  Eigen::VectorXd stdev;  // over kept columns, all > 0

  static Standardizer fit(const Eigen::MatrixXd& x);
  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
};

/// Flat binary tree; node 0 is the root. Leaves have feature == -1.
/// Samples with x[feature] <= threshold go left.
struct DecisionTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // positive-class fraction at this node
    int samples = 0;
  };
  std::vector<Node> nodes;

  template <typename Row>
  [[nodiscard]] double predict(const Row& z) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const auto& node = nodes[static_cast<std::size_t>(i)];
      i = z(node.feature) <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }
};

struct TrainedModel {
  Algorithm algorithm = Algorithm::LogisticRegression;
  Standardizer standardizer;
  LinearModel linear;               // LR, SVM
  std::vector<DecisionTree> trees;  // DT (one), RF
  std::uint64_t rng_seed = 0;
  std::uint64_t config_hash = 0;
};

/// Labels are 0/1. Throws DegenerateLabels when a class has fewer than two
/// rows and DimensionMismatch when x and y disagree.
TrainedModel train(const Eigen::MatrixXd& x, std::span<const int> y, const TrainConfig& cfg);
TrainedModel train(std::span<const FeatureVector> examples, const TrainConfig& cfg);

/// Scores in [0, 1]: sigmoid of the linear score (LR), sigmoid of the margin
/// (SVM), leaf positive fraction (DT) or its mean over trees (RF).
Eigen::VectorXd score(const TrainedModel& model, const Eigen::MatrixXd& x);
std::vector<double> score(const TrainedModel& model, std::span<const FeatureVector> examples);

/// Raw linear score w.z + b for LR and SVM models.
Eigen::VectorXd decision_function(const TrainedModel& model, const Eigen::MatrixXd& x);

// Solver building blocks; z is already standardized.

/// Mean log-loss plus (l2/2)|w|^2.
double logistic_loss(const Eigen::MatrixXd& z, std::span<const int> y, const LinearModel& model,
                     double l2);
/// Analytic gradient of logistic_loss; the bias gradient is returned in .bias.
LinearModel logistic_gradient(const Eigen::MatrixXd& z, std::span<const int> y,
                              const LinearModel& model, double l2);
/// Full-batch gradient descent from zero weights. When `loss_trace` is given
/// it receives the loss before the first step and after every epoch.
LinearModel fit_logistic(const Eigen::MatrixXd& z, std::span<const int> y, double learning_rate,
                         double l2, int epochs, std::vector<double>* loss_trace = nullptr);
/// Subgradient descent on mean hinge loss plus (l2/2)|w|^2.
LinearModel fit_linear_svm(const Eigen::MatrixXd& z, std::span<const int> y, double learning_rate,
                           double l2, int epochs);

/// Greedy Gini CART on the given (possibly repeated) row indices.
/// `features_per_split` < z.cols() draws that many candidate features per
/// node from `rng_state`.
DecisionTree grow_tree(const Eigen::MatrixXd& z, std::span<const int> y,
                       std::span<const Eigen::Index> rows, int max_depth, int min_leaf,
                       Eigen::Index features_per_split, std::uint64_t rng_seed);

inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const TrainedModel& model);
/// Throws Error(InvalidInput) for malformed or version-incompatible documents.
TrainedModel deserialize_model(std::string_view json_text);

}  // namespace playtime
