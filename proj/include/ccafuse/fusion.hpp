#pragma once

// Fit-embed-classify driver: per fold, learn the canonical directions on the
// training samples, embed both partitions, and train a forest on the fused
// embedding. Optional single-modality, early- and late-fusion baselines share
// the same folds and forest seeds.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "ccafuse/cca.hpp"
#include "ccafuse/error.hpp"
#include "ccafuse/forest.hpp"
#include "ccafuse/graph.hpp"
#include "ccafuse/io.hpp"
#include "ccafuse/matrix.hpp"
#include "ccafuse/metrics.hpp"
#include "ccafuse/parallel.hpp"
#include "ccafuse/random.hpp"

namespace ccafuse {

enum class FoldMode { kfold, fixed };

struct FusionConfig {
  CcaMethod method = CcaMethod::kgcca;
  int k = 100;
  GccaParams gcca = GccaParams::symmetric(1.0, 0.1, 1.0);
  SccaParams scca;
  DeflationMode deflation = DeflationMode::projective;
  PreprocessMode preprocess = PreprocessMode::center;
  double graph_min_weight = 0.0;  // data-driven graphs drop weaker edges
  ForestConfig forest;
  FoldMode fold_mode = FoldMode::kfold;
  int folds = 5;
  double test_fraction = 0.4;  // fixed mode
  std::uint64_t seed = 0;      // fold assignment
  bool baselines = false;

  void validate() const {
    if (k < 1) throw InvalidArgument("k must be at least 1");
    if (method == CcaMethod::kgcca) gcca.validate();
    else scca.validate();
    forest.validate();
    if (fold_mode == FoldMode::kfold && folds < 2) throw InvalidArgument("k-fold mode needs at least 2 folds");
    if (fold_mode == FoldMode::fixed && !(test_fraction > 0.0 && test_fraction < 1.0))
      throw InvalidArgument("test_fraction must lie in (0, 1)");
    if (!(graph_min_weight >= 0.0)) throw InvalidArgument("graph_min_weight must be nonnegative");
  }
};

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle; sample at shuffled position i goes to fold i mod K. Index
/// lists are returned in ascending order.
inline std::vector<Fold> make_folds(std::size_t n, const FusionConfig& config) {
  RandomStream stream(config.seed, 0);
  const auto perm = random_permutation(n, stream);
  std::vector<Fold> folds;
  if (config.fold_mode == FoldMode::fixed) {
    const auto n_test = static_cast<std::size_t>(std::floor(config.test_fraction * static_cast<double>(n)));
    if (n_test == 0 || n_test >= n) throw TooFewSamples(std::to_string(n) + " samples cannot form a fixed split");
    Fold f;
    f.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
    f.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
    folds.push_back(std::move(f));
  } else {
    const auto k = static_cast<std::size_t>(config.folds);
    if (n < k) throw TooFewSamples(std::to_string(n) + " samples cannot fill " + std::to_string(k) + " folds");
    folds.resize(k);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t f = 0; f < k; ++f) (i % k == f ? folds[f].test : folds[f].train).push_back(perm[i]);
  }
  for (auto& f : folds) {
    std::sort(f.train.begin(), f.train.end());
    std::sort(f.test.begin(), f.test.end());
  }
  return folds;
}

/// Feature blocks for one fold, features x samples.
struct FoldFeatures {
  Fold fold;
  Matrix train;
  Matrix test;
};

/// Every classifier input the pipeline evaluates, keyed by method name.
struct FoldInputs {
  Fold fold;
  std::vector<std::pair<std::string, FoldFeatures>> inputs;
  std::optional<EmbeddingModel> model;
};

namespace detail {

template <typename F>
auto with_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw StageFailure(e, stage);
  }
}

inline Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

inline std::vector<int> select(const std::vector<int>& v, const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace detail

/// Preprocesses with training statistics, fits the embedding on the training
/// samples and builds the classifier inputs of every requested method.
/// `prior_x` replaces the data-driven graph over X's features.
inline FoldInputs prepare_fold(const DataMatrix& x, const DataMatrix& y, const Fold& fold,
                               const std::optional<GraphLaplacian>& prior_x, const FusionConfig& config) {
  FoldInputs out;
  out.fold = fold;
  const DataMatrix x_tr_raw = x.select_samples(fold.train);
  const DataMatrix y_tr_raw = y.select_samples(fold.train);
  const auto [x_tr, x_te, y_tr, y_te] = detail::with_stage("preprocess", [&] {
    const auto sx = fit_preprocess(x_tr_raw, config.preprocess);
    const auto sy = fit_preprocess(y_tr_raw, config.preprocess);
    return std::tuple{apply_preprocess(x_tr_raw, sx), apply_preprocess(x.select_samples(fold.test), sx),
                      apply_preprocess(y_tr_raw, sy), apply_preprocess(y.select_samples(fold.test), sy)};
  });

  const std::string name = config.method == CcaMethod::kgcca ? std::to_string(config.k) + "-GCCA"
                                                               : std::to_string(config.k) + "-SCCA";
  out.model = detail::with_stage("fit", [&] {
    if (config.method == CcaMethod::kscca) return fit_kscca(x_tr, y_tr, config.k, config.scca, config.deflation);
    const GraphLaplacian l1 = prior_x ? *prior_x : laplacian_from_data(x_tr, config.graph_min_weight);
    const GraphLaplacian l2 = laplacian_from_data(y_tr, config.graph_min_weight);
    return fit_kgcca(x_tr, y_tr, l1, l2, config.k, config.gcca, config.deflation);
  });
  const auto [z_tr, z_te] = detail::with_stage("transform", [&] {
    return std::pair{transform(*out.model, x_tr, y_tr).fused, transform(*out.model, x_te, y_te).fused};
  });
  out.inputs.push_back({name, {fold, z_tr, z_te}});
  if (config.baselines) {
    out.inputs.push_back({"x_only", {fold, x_tr.values(), x_te.values()}});
    out.inputs.push_back({"y_only", {fold, y_tr.values(), y_te.values()}});
    out.inputs.push_back({"early_fusion",
                          {fold, detail::stack_rows(x_tr.values(), y_tr.values()),
                           detail::stack_rows(x_te.values(), y_te.values())}});
  }
  return out;
}

/// Out-of-fold predictions of one method.
struct MethodPredictions {
  std::string method;
  std::vector<int> labels;      // per sample, in input order
  std::vector<double> scores;
  std::vector<ClassificationScores> per_fold;
};

struct FusionResult {
  std::vector<std::string> sample_ids;
  std::vector<int> true_labels;
  std::vector<MethodPredictions> methods;  // fused method first, then baselines
  std::vector<EvalRecord> records;
  std::vector<EmbeddingModel> fold_models;
};

namespace detail {

inline ForestPrediction fold_forest(const FoldFeatures& f, const std::vector<int>& labels, ForestConfig forest,
                                    std::size_t fold_index) {
  forest.seed += fold_index;
  const auto model = with_stage("classify", [&] { return train_forest(f.train, select(labels, f.fold.train), forest); });
  return predict_forest(model, f.test);
}

inline void scatter(MethodPredictions& m, const Fold& fold, const ForestPrediction& p) {
  for (std::size_t i = 0; i < fold.test.size(); ++i) {
    m.labels[fold.test[i]] = p.labels[i];
    m.scores[fold.test[i]] = p.scores[i];
  }
}

}  // namespace detail

/// Trains and evaluates a forest per fold and method on precomputed inputs.
/// Labels are indexed like the samples the folds refer to, so a permuted
/// label vector reuses the same embeddings.
inline std::vector<MethodPredictions> classify_folds(const std::vector<FoldInputs>& folds,
                                                     const std::vector<int>& labels, const FusionConfig& config) {
  std::vector<MethodPredictions> out;
  if (folds.empty()) return out;
  const std::size_t n = labels.size();
  const std::size_t n_methods = folds.front().inputs.size();
  for (std::size_t m = 0; m < n_methods; ++m)
    out.push_back({folds.front().inputs[m].first, std::vector<int>(n, 0), std::vector<double>(n, 0.0), {}});

  std::vector<std::vector<ForestPrediction>> preds(folds.size(), std::vector<ForestPrediction>(n_methods));
  parallel_for(folds.size() * n_methods, [&](std::size_t job) {
    const std::size_t f = job / n_methods;
    const std::size_t m = job % n_methods;
    preds[f][m] = detail::fold_forest(folds[f].inputs[m].second, labels, config.forest, f);
  });

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto truth = detail::select(labels, folds[f].fold.test);
    for (std::size_t m = 0; m < n_methods; ++m) {
      detail::scatter(out[m], folds[f].fold, preds[f][m]);
      out[m].per_fold.push_back(classification_metrics(truth, preds[f][m].labels, preds[f][m].scores));
    }
  }
  if (config.baselines) {
    const auto column = [&](const std::string& name) {
      std::vector<ForestPrediction> col;
      for (std::size_t m = 0; m < n_methods; ++m)
        if (out[m].method == name)
          for (const auto& row : preds) col.push_back(row[m]);
      return col;
    };
    const auto xs = column("x_only");
    const auto ys = column("y_only");
    MethodPredictions late{"late_fusion", std::vector<int>(n, 0), std::vector<double>(n, 0.0), {}};
    for (std::size_t f = 0; f < folds.size(); ++f) {
      ForestPrediction p;
      for (std::size_t i = 0; i < xs[f].scores.size(); ++i) {
        const double s = 0.5 * (xs[f].scores[i] + ys[f].scores[i]);
        p.scores.push_back(s);
        p.labels.push_back(s >= 0.5 ? 1 : 0);
      }
      detail::scatter(late, folds[f].fold, p);
      late.per_fold.push_back(
          classification_metrics(detail::select(labels, folds[f].fold.test), p.labels, p.scores));
    }
    out.push_back(std::move(late));
  }
  return out;
}

/// Out-of-fold metrics over all test samples of `folds`.
inline ClassificationScores pooled_scores(const MethodPredictions& m, const std::vector<int>& labels,
                                          const std::vector<FoldInputs>& folds) {
  std::vector<int> truth, pred;
  std::vector<double> scores;
  for (const auto& f : folds)
    for (auto i : f.fold.test) {
      truth.push_back(labels[i]);
      pred.push_back(m.labels[i]);
      scores.push_back(m.scores[i]);
    }
  return classification_metrics(truth, pred, scores);
}

inline std::vector<FoldInputs> prepare_folds(const DataMatrix& x, const DataMatrix& y,
                                             const std::optional<GraphLaplacian>& prior_x,
                                             const FusionConfig& config) {
  require_same_samples(x, y);
  const auto folds = make_folds(static_cast<std::size_t>(x.samples()), config);
  std::vector<FoldInputs> out(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) out[f] = prepare_fold(x, y, folds[f], prior_x, config);
  return out;
}

inline FusionResult run_fusion_pipeline(const DataMatrix& x, const DataMatrix& y, const std::vector<int>& labels,
                                        const std::optional<GraphLaplacian>& prior_x, const FusionConfig& config) {
  config.validate();
  if (static_cast<Eigen::Index>(labels.size()) != x.samples())
    throw DimensionMismatch("label count does not match sample count");
  const auto folds = prepare_folds(x, y, prior_x, config);

  FusionResult result;
  result.sample_ids = x.sample_ids();
  result.true_labels = labels;
  result.methods = classify_folds(folds, labels, config);
  for (const auto& f : folds) result.fold_models.push_back(*f.model);

  const auto emit = [&](const std::string& method, const std::string& fold, const ClassificationScores& s) {
    const std::vector<std::pair<std::string, std::string>> ctx{{"method", method}, {"fold", fold}};
    result.records.push_back({"accuracy", s.accuracy, ctx});
    result.records.push_back({"weighted_f1", s.weighted_f1, ctx});
    if (s.weighted_auc) result.records.push_back({"weighted_auc", *s.weighted_auc, ctx});
  };
  for (const auto& m : result.methods) {
    for (std::size_t f = 0; f < m.per_fold.size(); ++f) emit(m.method, std::to_string(f), m.per_fold[f]);
    emit(m.method, "pooled", pooled_scores(m, labels, folds));
  }
  return result;
}

/// File-based entry point; labels are matched to X's sample ids.
inline FusionResult run_fusion_pipeline(const std::string& x_path, const std::string& y_path,
                                        const std::string& labels_path, const std::optional<std::string>& edge_path,
                                        const FusionConfig& config) {
  const DataMatrix x = detail::with_stage("load", [&] { return read_matrix_csv(x_path); });
  const DataMatrix y = detail::with_stage("load", [&] { return read_matrix_csv(y_path); });
  const std::vector<int> labels =
      detail::with_stage("load", [&] { return read_labels_csv(labels_path).aligned_to(x.sample_ids()); });
  std::optional<GraphLaplacian> prior;
  if (edge_path)
    prior = detail::with_stage(
        "graph", [&] { return laplacian_from_edges(read_edge_tsv(*edge_path), x.feature_names()).laplacian; });
  return run_fusion_pipeline(x, y, labels, prior, config);
}

/// Pooled weighted F1 of the first method after each of `permutations`
/// seeded label shuffles, reusing the fold inputs.
inline std::vector<double> permutation_null_f1(const std::vector<FoldInputs>& folds, const std::vector<int>& labels,
                                               const FusionConfig& config, int permutations, std::uint64_t seed) {
  FusionConfig fused_only = config;
  fused_only.baselines = false;
  std::vector<FoldInputs> trimmed = folds;
  for (auto& f : trimmed) f.inputs.resize(1);
  std::vector<double> out;
  for (int r = 0; r < permutations; ++r) {
    RandomStream stream(seed, static_cast<std::uint64_t>(r));
    std::vector<int> shuffled = labels;
    stream.shuffle(std::span<int>(shuffled));
    const auto preds = classify_folds(trimmed, shuffled, fused_only);
    out.push_back(pooled_scores(preds.front(), shuffled, trimmed).weighted_f1);
  }
  return out;
}

}  // namespace ccafuse
