#include "playtime/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "playtime/error.hpp"
#include "playtime/parallel.hpp"

namespace playtime {
namespace {

using nlohmann::json;

double sigmoid(double s) {
  return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

// log(1 + e^s) without overflow.
double softplus(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

Eigen::VectorXd as_vector(std::span<const int> y) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(i)) = y[i];
  return v;
}

void check_labels(const Eigen::MatrixXd& x, std::span<const int> y) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(x.rows()) + " rows but " +
                                                  std::to_string(y.size()) + " labels");
  }
  std::size_t positives = 0;
  for (int label : y) {
    if (label != 0 && label != 1) throw Error(ErrorCode::InvalidInput, "labels must be 0 or 1");
    positives += static_cast<std::size_t>(label);
  }
  if (positives < 2 || y.size() - positives < 2) {
    throw Error(ErrorCode::DegenerateLabels, "training needs at least two rows of each class (" +
                                                 std::to_string(positives) + " positive, " +
                                                 std::to_string(y.size() - positives) +
                                                 " negative)");
  }
}

// Sum of squared class counts over node size; larger is purer. Weighted
// Gini impurity equals n minus this.
double purity(double positives, double n) {
  return (positives * positives + (n - positives) * (n - positives)) / n;
}

class TreeGrower {
 public:
  TreeGrower(const Eigen::MatrixXd& z, std::span<const int> y, int max_depth, int min_leaf,
             Eigen::Index features_per_split, std::uint64_t seed)
      : z_(z), y_(y), max_depth_(max_depth), min_leaf_(min_leaf),
        features_per_split_(std::clamp<Eigen::Index>(features_per_split, 1,
                                                     std::max<Eigen::Index>(z.cols(), 1))),
        rng_(seed), pool_(static_cast<std::size_t>(z.cols())) {
    std::iota(pool_.begin(), pool_.end(), Eigen::Index{0});
  }

  DecisionTree grow(std::vector<Eigen::Index> rows) {
    grow_node(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    Eigen::Index feature = -1;
    double threshold = 0.0;
    double score = 0.0;
  };

  int grow_node(std::vector<Eigen::Index> rows, int depth) {
    const auto n = static_cast<double>(rows.size());
    double positives = 0.0;
    for (auto r : rows) positives += y_[static_cast<std::size_t>(r)];
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({-1, 0.0, -1, -1, positives / n, static_cast<int>(rows.size())});

    const bool pure = positives == 0.0 || positives == n;
    if (pure || depth >= max_depth_ || rows.size() < 2 * static_cast<std::size_t>(min_leaf_)) {
      return index;
    }
    const Split split = best_split(rows, positives);
    if (split.feature < 0 || !(split.score > purity(positives, n) * (1.0 + 1e-12))) return index;

    std::vector<Eigen::Index> left;
    std::vector<Eigen::Index> right;
    for (auto r : rows) (z_(r, split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    tree_.nodes[static_cast<std::size_t>(index)].feature = static_cast<int>(split.feature);
    tree_.nodes[static_cast<std::size_t>(index)].threshold = split.threshold;
    const int l = grow_node(std::move(left), depth + 1);
    tree_.nodes[static_cast<std::size_t>(index)].left = l;
    const int r = grow_node(std::move(right), depth + 1);
    tree_.nodes[static_cast<std::size_t>(index)].right = r;
    return index;
  }

  // Candidate features in ascending index order, so ties resolve to the
  // lowest feature, then the lowest threshold.
  std::vector<Eigen::Index> candidate_features() {
    if (features_per_split_ >= z_.cols()) return pool_;
    for (Eigen::Index i = 0; i < features_per_split_; ++i) {
      std::uniform_int_distribution<Eigen::Index> pick(i, z_.cols() - 1);
      std::swap(pool_[static_cast<std::size_t>(i)], pool_[static_cast<std::size_t>(pick(rng_))]);
    }
    std::vector<Eigen::Index> chosen(pool_.begin(), pool_.begin() + features_per_split_);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  Split best_split(const std::vector<Eigen::Index>& rows, double positives) {
    Split best;
    const auto n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(min_leaf_);
    std::vector<std::pair<double, int>> column(n);
    for (auto f : candidate_features()) {
      for (std::size_t i = 0; i < n; ++i) {
        column[i] = {z_(rows[i], f), y_[static_cast<std::size_t>(rows[i])]};
      }
      std::sort(column.begin(), column.end());
      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pos += column[i].second;
        const std::size_t left_n = i + 1;
        if (left_n < min_leaf) continue;
        if (n - left_n < min_leaf) break;
        if (!(column[i].first < column[i + 1].first)) continue;
        const double score = purity(left_pos, static_cast<double>(left_n)) +
                             purity(positives - left_pos, static_cast<double>(n - left_n));
        if (best.feature < 0 || score > best.score) {
          double threshold = 0.5 * (column[i].first + column[i + 1].first);
          if (!(threshold < column[i + 1].first)) threshold = column[i].first;
          best = {f, threshold, score};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& z_;
  std::span<const int> y_;
  int max_depth_;
  int min_leaf_;
  Eigen::Index features_per_split_;
  std::mt19937_64 rng_;
  std::vector<Eigen::Index> pool_;
  DecisionTree tree_;
};

Eigen::Index features_per_split(const TrainConfig& cfg, Eigen::Index p) {
  if (p == 0) return 1;
  const double fraction = cfg.feature_subsample.value_or(std::sqrt(static_cast<double>(p)) /
                                                         static_cast<double>(p));
  return std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(p))), 1, p);
}

std::vector<DecisionTree> fit_forest(const Eigen::MatrixXd& z, std::span<const int> y,
                                     const TrainConfig& cfg) {
  const auto n = z.rows();
  const Eigen::Index mtry = features_per_split(cfg, z.cols());
  std::vector<DecisionTree> trees(static_cast<std::size_t>(cfg.n_trees));
  parallel_for(trees.size(), cfg.threads, [&](std::size_t t) {
    const std::uint64_t tree_seed = mix_seed(cfg.rng_seed, t);
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    if (cfg.bootstrap) {
      std::mt19937_64 rng(mix_seed(tree_seed, 0));
      std::uniform_int_distribution<Eigen::Index> draw(0, n - 1);
      for (auto& r : rows) r = draw(rng);
    } else {
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    }
    trees[t] = grow_tree(z, y, rows, cfg.max_depth, cfg.min_leaf, mtry, mix_seed(tree_seed, 1));
  });
  return trees;
}

// FNV-1a.
class Hasher {
 public:
  template <typename T>
  Hasher& add(const T& value) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(&value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      state_ ^= bytes[i];
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  [[nodiscard]] std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

json node_to_json(const DecisionTree& tree, int index) {
  const auto& node = tree.nodes[static_cast<std::size_t>(index)];
  json j{{"value", node.value}, {"samples", node.samples}};
  if (node.feature >= 0) {
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["left"] = node_to_json(tree, node.left);
    j["right"] = node_to_json(tree, node.right);
  }
  return j;
}

int node_from_json(const json& j, DecisionTree& tree) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back({-1, 0.0, -1, -1, j.at("value").get<double>(), j.at("samples").get<int>()});
  if (j.contains("feature")) {
    tree.nodes[static_cast<std::size_t>(index)].feature = j.at("feature").get<int>();
    tree.nodes[static_cast<std::size_t>(index)].threshold = j.at("threshold").get<double>();
    const int l = node_from_json(j.at("left"), tree);
    tree.nodes[static_cast<std::size_t>(index)].left = l;
    const int r = node_from_json(j.at("right"), tree);
    tree.nodes[static_cast<std::size_t>(index)].right = r;
  }
  return index;
}

template <typename V>
std::vector<double> to_std(const V& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::LogisticRegression: return "LR";
    case Algorithm::LinearSVM: return "SVM";
    case Algorithm::DecisionTree: return "DT";
    case Algorithm::RandomForest: return "RF";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) {
  for (auto a : kAllAlgorithms) {
    if (to_string(a) == text) return a;
  }
  return std::nullopt;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(l2_penalty >= 0.0)) fail("l2_penalty must be non-negative");
  if (epochs < 1) fail("epochs must be positive");
  if (max_depth < 1) fail("max_depth must be positive");
  if (min_leaf < 1) fail("min_leaf must be positive");
  if (n_trees < 1) fail("n_trees must be positive");
  if (feature_subsample && !(*feature_subsample > 0.0 && *feature_subsample <= 1.0)) {
    fail("feature_subsample must lie in (0, 1]");
  }
}

std::uint64_t TrainConfig::hash() const {
  Hasher h;
  h.add(static_cast<int>(algorithm)).add(learning_rate).add(l2_penalty).add(epochs);
  h.add(max_depth).add(min_leaf).add(n_trees).add(feature_subsample.value_or(-1.0));
  h.add(bootstrap).add(rng_seed);
  return h.value();
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  Standardizer s;
  s.input_dim = x.cols();
  std::vector<double> mean;
  std::vector<double> stdev;
  const auto n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mu = x.col(j).sum() / n;
    const double sd = std::sqrt((x.col(j).array() - mu).square().sum() / n);
    if (sd > 1e-12 * std::max(1.0, std::abs(mu))) {
      s.kept.push_back(j);
      mean.push_back(mu);
      stdev.push_back(sd);
    } else {
      s.dropped.push_back(j);
    }
  }
  s.mean = to_eigen(mean);
  s.stdev = to_eigen(stdev);
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != input_dim) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(input_dim) +
                                                  " features, got " + std::to_string(x.cols()));
  }
  Eigen::MatrixXd z(x.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    z.col(c) = (x.col(kept[j]).array() - mean(c)) / stdev(c);
  }
  return z;
}

double logistic_loss(const Eigen::MatrixXd& z, std::span<const int> y, const LinearModel& model,
                     double l2) {
  const Eigen::VectorXd s = (z * model.weights).array() + model.bias;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    loss += softplus(s(i)) - y[static_cast<std::size_t>(i)] * s(i);
  }
  return loss / static_cast<double>(s.size()) + 0.5 * l2 * model.weights.squaredNorm();
}

LinearModel logistic_gradient(const Eigen::MatrixXd& z, std::span<const int> y,
                              const LinearModel& model, double l2) {
  const Eigen::VectorXd s = (z * model.weights).array() + model.bias;
  const Eigen::VectorXd residual = s.unaryExpr(&sigmoid) - as_vector(y);
  const auto n = static_cast<double>(s.size());
  return {z.transpose() * residual / n + l2 * model.weights, residual.sum() / n};
}

LinearModel fit_logistic(const Eigen::MatrixXd& z, std::span<const int> y, double learning_rate,
                         double l2, int epochs, std::vector<double>* loss_trace) {
  LinearModel model{Eigen::VectorXd::Zero(z.cols()), 0.0};
  if (loss_trace) loss_trace->push_back(logistic_loss(z, y, model, l2));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const LinearModel grad = logistic_gradient(z, y, model, l2);
    model.weights -= learning_rate * grad.weights;
    model.bias -= learning_rate * grad.bias;
    if (loss_trace) loss_trace->push_back(logistic_loss(z, y, model, l2));
  }
  return model;
}

LinearModel fit_linear_svm(const Eigen::MatrixXd& z, std::span<const int> y, double learning_rate,
                           double l2, int epochs) {
  const Eigen::VectorXd sign = 2.0 * as_vector(y).array() - 1.0;
  const auto n = static_cast<double>(z.rows());
  LinearModel model{Eigen::VectorXd::Zero(z.cols()), 0.0};
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const Eigen::VectorXd margin = sign.array() * ((z * model.weights).array() + model.bias);
    // Hinge subgradient: -y z for every row inside the margin.
    const Eigen::VectorXd active = (margin.array() < 1.0).cast<double>() * sign.array();
    const Eigen::VectorXd grad_w = l2 * model.weights - z.transpose() * active / n;
    const double grad_b = -active.sum() / n;
    const double step = learning_rate / std::sqrt(1.0 + epoch);
    model.weights -= step * grad_w;
    model.bias -= step * grad_b;
  }
  return model;
}

DecisionTree grow_tree(const Eigen::MatrixXd& z, std::span<const int> y,
                       std::span<const Eigen::Index> rows, int max_depth, int min_leaf,
                       Eigen::Index features_per_split, std::uint64_t rng_seed) {
  TreeGrower grower(z, y, max_depth, min_leaf, features_per_split, rng_seed);
  return grower.grow(std::vector<Eigen::Index>(rows.begin(), rows.end()));
}

TrainedModel train(const Eigen::MatrixXd& x, std::span<const int> y, const TrainConfig& cfg) {
  cfg.validate();
  check_labels(x, y);
  TrainedModel model;
  model.algorithm = cfg.algorithm;
  model.rng_seed = cfg.rng_seed;
  model.config_hash = cfg.hash();
  model.standardizer = Standardizer::fit(x);
  const Eigen::MatrixXd z = model.standardizer.apply(x);
  switch (cfg.algorithm) {
    case Algorithm::LogisticRegression:
      model.linear = fit_logistic(z, y, cfg.learning_rate, cfg.l2_penalty, cfg.epochs);
      break;
    case Algorithm::LinearSVM:
      model.linear = fit_linear_svm(z, y, cfg.learning_rate, cfg.l2_penalty, cfg.epochs);
      break;
    case Algorithm::DecisionTree: {
      std::vector<Eigen::Index> rows(static_cast<std::size_t>(z.rows()));
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
      model.trees.push_back(
          grow_tree(z, y, rows, cfg.max_depth, cfg.min_leaf, z.cols(), cfg.rng_seed));
      break;
    }
    case Algorithm::RandomForest:
      model.trees = fit_forest(z, y, cfg);
      break;
  }
  return model;
}

TrainedModel train(std::span<const FeatureVector> examples, const TrainConfig& cfg) {
  if (examples.empty()) throw Error(ErrorCode::DegenerateLabels, "no training examples");
  const auto dim = examples.front().values.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(examples.size()), dim);
  std::vector<int> y;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].values.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "feature vectors differ in length");
    }
    if (!examples[i].label) {
      throw Error(ErrorCode::InvalidInput, "training example '" + examples[i].player_id +
                                               "' has no label");
    }
    x.row(static_cast<Eigen::Index>(i)) = examples[i].values.transpose();
    y.push_back(*examples[i].label ? 1 : 0);
  }
  return train(x, y, cfg);
}

Eigen::VectorXd decision_function(const TrainedModel& model, const Eigen::MatrixXd& x) {
  if (model.algorithm != Algorithm::LogisticRegression && model.algorithm != Algorithm::LinearSVM) {
    throw Error(ErrorCode::InvalidConfig, "decision_function needs a linear model");
  }
  const Eigen::MatrixXd z = model.standardizer.apply(x);
  return (z * model.linear.weights).array() + model.linear.bias;
}

Eigen::VectorXd score(const TrainedModel& model, const Eigen::MatrixXd& x) {
  if (model.algorithm == Algorithm::LogisticRegression || model.algorithm == Algorithm::LinearSVM) {
    return decision_function(model, x).unaryExpr(&sigmoid);
  }
  const Eigen::MatrixXd z = model.standardizer.apply(x);
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict(z.row(i));
    scores(i) = sum / static_cast<double>(model.trees.size());
  }
  return scores;
}

std::vector<double> score(const TrainedModel& model, std::span<const FeatureVector> examples) {
  if (examples.empty()) return {};
  const auto dim = examples.front().values.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(examples.size()), dim);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].values.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "feature vectors differ in length");
    }
    x.row(static_cast<Eigen::Index>(i)) = examples[i].values.transpose();
  }
  return to_std(score(model, x));
}

std::string serialize_model(const TrainedModel& model) {
  const auto& s = model.standardizer;
  json doc{{"format", "playtime.model"},
           {"version", kModelFormatVersion},
           {"algorithm", to_string(model.algorithm)},
           {"meta", {{"rng_seed", model.rng_seed}, {"config_hash", model.config_hash}}},
           {"standardizer",
            {{"input_dim", s.input_dim},
             {"kept", s.kept},
             {"dropped", s.dropped},
             {"mean", to_std(s.mean)},
             {"stdev", to_std(s.stdev)}}}};
  if (model.algorithm == Algorithm::LogisticRegression || model.algorithm == Algorithm::LinearSVM) {
    doc["linear"] = {{"weights", to_std(model.linear.weights)}, {"bias", model.linear.bias}};
  } else {
    auto& trees = doc["trees"] = json::array();
    for (const auto& tree : model.trees) trees.push_back(node_to_json(tree, 0));
  }
  return doc.dump(1);
}

TrainedModel deserialize_model(std::string_view json_text) {
  try {
    const auto doc = json::parse(json_text);
    if (doc.at("format") != "playtime.model") {
      throw Error(ErrorCode::InvalidInput, "not a model document");
    }
    if (doc.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::InvalidInput, "unsupported model version " + doc.at("version").dump());
    }
    TrainedModel model;
    const auto algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
    if (!algorithm) throw Error(ErrorCode::InvalidInput, "unknown algorithm");
    model.algorithm = *algorithm;
    model.rng_seed = doc.at("meta").at("rng_seed").get<std::uint64_t>();
    model.config_hash = doc.at("meta").at("config_hash").get<std::uint64_t>();
    const auto& s = doc.at("standardizer");
    model.standardizer.input_dim = s.at("input_dim").get<Eigen::Index>();
    model.standardizer.kept = s.at("kept").get<std::vector<Eigen::Index>>();
    model.standardizer.dropped = s.at("dropped").get<std::vector<Eigen::Index>>();
    model.standardizer.mean = to_eigen(s.at("mean").get<std::vector<double>>());
    model.standardizer.stdev = to_eigen(s.at("stdev").get<std::vector<double>>());
    if (doc.contains("linear")) {
      model.linear.weights = to_eigen(doc.at("linear").at("weights").get<std::vector<double>>());
      model.linear.bias = doc.at("linear").at("bias").get<double>();
    }
    if (doc.contains("trees")) {
      for (const auto& j : doc.at("trees")) {
        DecisionTree tree;
        node_from_json(j, tree);
        model.trees.push_back(std::move(tree));
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed model JSON: ") + e.what());
  }
}

}  // namespace playtime
