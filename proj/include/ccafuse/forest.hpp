#pragma once

// Bagged Gini decision trees for binary labels.
//
// Tree t draws its bootstrap sample and its per-node feature subsets from the
// random stream (seed, t), so each tree is a pure function of the inputs, the
// seed and its own index.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ccafuse/error.hpp"
#include "ccafuse/matrix.hpp"
#include "ccafuse/parallel.hpp"
#include "ccafuse/random.hpp"

namespace ccafuse {

enum class FeatureSubset { sqrt, all };

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 50;
  int min_samples_split = 2;
  FeatureSubset features_per_split = FeatureSubset::sqrt;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_trees < 1) throw InvalidArgument("n_trees must be at least 1");
    if (max_depth < 1) throw InvalidArgument("max_depth must be at least 1");
    if (min_samples_split < 2) throw InvalidArgument("min_samples_split must be at least 2");
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // go left when value <= threshold
  int left = -1;
  int right = -1;
  double prob0 = 0.0;
  double prob1 = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict_proba(const Eigen::Ref<const Vector>& sample) const {
    int at = 0;
    while (!nodes[static_cast<std::size_t>(at)].is_leaf()) {
      const auto& node = nodes[static_cast<std::size_t>(at)];
      at = sample(node.feature) <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(at)].prob1;
  }
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  ForestConfig config;
  int n_features = 0;
};

struct ForestPrediction {
  std::vector<int> labels;
  std::vector<double> scores;  // mean leaf probability of class 1
};

/// Bootstrap draw (n indices with replacement) of tree `tree_index`.
inline std::vector<std::size_t> bootstrap_indices(std::uint64_t seed, std::size_t tree_index, std::size_t n) {
  RandomStream stream(seed, tree_index);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = static_cast<std::size_t>(stream.uniform_index(n));
  return idx;
}

namespace detail {

struct SplitChoice {
  bool found = false;
  int feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child Gini, times node size
};

inline double gini_times_n(double n0, double n1) {
  const double n = n0 + n1;
  if (n == 0.0) return 0.0;
  return n - (n0 * n0 + n1 * n1) / n;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& z, const std::vector<int>& labels, const ForestConfig& config, RandomStream& stream)
      : z_(z), labels_(labels), config_(config), stream_(stream) {
    const auto d = static_cast<int>(z.rows());
    mtry_ = config.features_per_split == FeatureSubset::all
                ? d
                : std::min(d, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d)))));
    feature_pool_.resize(static_cast<std::size_t>(d));
  }

  DecisionTree build(std::vector<std::size_t> samples) {
    tree_.nodes.clear();
    grow(std::move(samples), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> samples, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double n1 = 0.0;
    for (auto s : samples) n1 += labels_[s];
    const auto n = static_cast<double>(samples.size());
    const double n0 = n - n1;
    {
      auto& node = tree_.nodes.back();
      node.prob1 = n1 / n;
      node.prob0 = 1.0 - node.prob1;
    }
    const bool pure = n0 == 0.0 || n1 == 0.0;
    if (pure || depth >= config_.max_depth || static_cast<int>(samples.size()) < config_.min_samples_split) return id;

    const SplitChoice split = best_split(samples, n0, n1);
    if (!split.found) return id;

    std::vector<std::size_t> left, right;
    for (auto s : samples) (z_(split.feature, static_cast<Eigen::Index>(s)) <= split.threshold ? left : right).push_back(s);
    samples.clear();
    samples.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  SplitChoice best_split(const std::vector<std::size_t>& samples, double n0, double n1) {
    // Partial Fisher-Yates: the first mtry_ entries become the candidate features.
    std::iota(feature_pool_.begin(), feature_pool_.end(), 0);
    const std::size_t d = feature_pool_.size();
    for (std::size_t i = 0; i < static_cast<std::size_t>(mtry_); ++i) {
      const auto j = i + static_cast<std::size_t>(stream_.uniform_index(d - i));
      std::swap(feature_pool_[i], feature_pool_[j]);
    }

    SplitChoice best;
    std::vector<std::pair<double, int>> column(samples.size());
    for (int c = 0; c < mtry_; ++c) {
      const int f = feature_pool_[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < samples.size(); ++i)
        column[i] = {z_(f, static_cast<Eigen::Index>(samples[i])), labels_[samples[i]]};
      std::sort(column.begin(), column.end());
      double left0 = 0.0, left1 = 0.0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        (column[i].second == 1 ? left1 : left0) += 1.0;
        const double lo = column[i].first;
        const double hi = column[i + 1].first;
        if (!(lo < hi)) continue;
        double threshold = lo + 0.5 * (hi - lo);
        if (!(threshold < hi)) threshold = lo;
        const double impurity = gini_times_n(left0, left1) + gini_times_n(n0 - left0, n1 - left1);
        if (!best.found || impurity < best.impurity ||
            (impurity == best.impurity &&
             (f < best.feature || (f == best.feature && threshold < best.threshold)))) {
          best = {true, f, threshold, impurity};
        }
      }
    }
    return best;
  }

  const Matrix& z_;
  const std::vector<int>& labels_;
  const ForestConfig& config_;
  RandomStream& stream_;
  int mtry_ = 1;
  std::vector<int> feature_pool_;
  DecisionTree tree_;
};

inline void check_binary_labels(const std::vector<int>& labels) {
  for (int y : labels)
    if (y != 0 && y != 1) throw InvalidArgument("labels must be 0 or 1");
}

}  // namespace detail

/// Tree `tree_index` of a forest trained with `config`.
inline DecisionTree train_tree(const Matrix& z, const std::vector<int>& labels, const ForestConfig& config,
                               std::size_t tree_index) {
  const auto n = static_cast<std::size_t>(z.cols());
  // The bootstrap consumes the head of the tree's stream; feature draws continue from there.
  RandomStream stream(config.seed, tree_index);
  std::vector<std::size_t> sample(n);
  for (auto& i : sample) i = static_cast<std::size_t>(stream.uniform_index(n));
  detail::TreeBuilder builder(z, labels, config, stream);
  return builder.build(std::move(sample));
}

/// z is features x samples.
inline ForestModel train_forest(const Matrix& z, const std::vector<int>& labels, const ForestConfig& config) {
  config.validate();
  if (static_cast<Eigen::Index>(labels.size()) != z.cols())
    throw DimensionMismatch("label count does not match sample count");
  if (z.cols() < 2) throw TooFewSamples("forest training needs at least two samples");
  if (!z.allFinite()) throw InvalidArgument("forest input contains NaN or Inf");
  detail::check_binary_labels(labels);
  const auto ones = std::count(labels.begin(), labels.end(), 1);
  if (ones == 0 || ones == static_cast<std::ptrdiff_t>(labels.size()))
    throw SingleClassTraining("training labels contain a single class");

  ForestModel model;
  model.config = config;
  model.n_features = static_cast<int>(z.rows());
  model.trees.resize(static_cast<std::size_t>(config.n_trees));
  parallel_for(model.trees.size(), [&](std::size_t t) { model.trees[t] = train_tree(z, labels, config, t); });
  return model;
}

inline ForestPrediction predict_forest(const ForestModel& model, const Matrix& z) {
  if (z.rows() != model.n_features)
    throw DimensionMismatch("forest expects " + std::to_string(model.n_features) + " features, got " +
                            std::to_string(z.rows()));
  ForestPrediction out;
  const auto m = static_cast<std::size_t>(z.cols());
  out.scores.assign(m, 0.0);
  out.labels.assign(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    const Vector sample = z.col(static_cast<Eigen::Index>(j));
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict_proba(sample);
    out.scores[j] = sum / static_cast<double>(model.trees.size());
    out.labels[j] = out.scores[j] >= 0.5 ? 1 : 0;
  }
  return out;
}

}  // namespace ccafuse
