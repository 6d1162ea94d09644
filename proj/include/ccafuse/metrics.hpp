#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccafuse/cca.hpp"
#include "ccafuse/error.hpp"
#include "ccafuse/graph.hpp"
#include "ccafuse/matrix.hpp"

namespace ccafuse {

/// A named scalar with ordered key=value context tags.
struct EvalRecord {
  std::string name;
  double value = 0.0;
  std::vector<std::pair<std::string, std::string>> context;

  std::string tag(const std::string& key) const {
    for (const auto& [k, v] : context)
      if (k == key) return v;
    return {};
  }
};

/// 1 - |a·b| / (‖a‖‖b‖), in [0, 1].
inline double cosine_distance_abs(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("cosine distance of vectors with different lengths");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine distance of a zero vector");
  return std::clamp(1.0 - std::abs(a.dot(b)) / (na * nb), 0.0, 1.0);
}

inline double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("pearson of vectors with different lengths");
  if (a.size() < 2) throw ConstantInput("pearson needs at least two observations");
  const double r = detail::pearson_unchecked(a, b);
  if (std::isnan(r)) throw ConstantInput("pearson of a constant vector");
  return r;
}

/// |ρ - ρ̂| with ρ from the true directions and ρ̂ from the estimates, both on
/// the supplied (test) data. Sign-sensitive by construction.
inline double correlation_error(const Vector& u_true, const Vector& v_true, const Vector& u_hat, const Vector& v_hat,
                                const DataMatrix& x_test, const DataMatrix& y_test) {
  const Matrix& x = x_test.values();
  const Matrix& y = y_test.values();
  if (u_true.size() != x.rows() || u_hat.size() != x.rows() || v_true.size() != y.rows() || v_hat.size() != y.rows())
    throw DimensionMismatch("correlation_error: direction sizes do not match data");
  const double rho = pearson(x.transpose() * u_true, y.transpose() * v_true);
  const double rho_hat = pearson(x.transpose() * u_hat, y.transpose() * v_hat);
  return std::abs(rho - rho_hat);
}

/// |uᵀLu - ûᵀLû| / |uᵀLu|.
inline double spectral_frequency_ratio(const Vector& u_true, const Vector& u_hat, const GraphLaplacian& l) {
  const Matrix& m = l.matrix();
  if (u_true.size() != m.rows() || u_hat.size() != m.rows())
    throw DimensionMismatch("spectral_frequency_ratio: vector sizes do not match Laplacian");
  const double truth = u_true.dot(m * u_true);
  const double est = u_hat.dot(m * u_hat);
  const double scale = u_true.squaredNorm() * std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  if (std::abs(truth) <= 1e-14 * scale) throw ZeroDenominator("true direction lies in the Laplacian null space");
  return std::abs(truth - est) / std::abs(truth);
}

/// Σ_j |pearson(u_jᵀX, v_jᵀY)| over the model's components; a component whose
/// variates are constant on this data contributes 0.
inline double sum_correlations(const EmbeddingModel& model, const DataMatrix& x, const DataMatrix& y) {
  const FusedEmbedding z = transform(model, x, y);
  double total = 0.0;
  for (int j = 0; j < model.k; ++j) {
    const double r = detail::pearson_unchecked(z.x_embedded.row(j).transpose(), z.y_embedded.row(j).transpose());
    if (std::isfinite(r)) total += std::abs(r);
  }
  return total;
}

struct ClassificationScores {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  std::optional<double> weighted_auc;  // absent when y_true has one class
};

/// Mann-Whitney AUC of `scores` for class `positive`, midranks for ties.
inline double rank_auc(const std::vector<int>& y_true, const std::vector<double>& scores, int positive) {
  const std::size_t n = y_true.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
    i = j + 1;
  }
  double pos_rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (y_true[i] == positive) {
      pos_rank_sum += rank[i];
      n_pos += 1.0;
    }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw SingleClassInput("AUC needs both classes in y_true");
  return (pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

/// Support-weighted AUC over the two classes (class 0 scored by 1 - s).
inline double weighted_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
  const auto n = static_cast<double>(y_true.size());
  const double support1 = static_cast<double>(std::count(y_true.begin(), y_true.end(), 1));
  const double support0 = n - support1;
  std::vector<double> flipped(scores.size());
  std::transform(scores.begin(), scores.end(), flipped.begin(), [](double s) { return 1.0 - s; });
  return (support1 / n) * rank_auc(y_true, scores, 1) + (support0 / n) * rank_auc(y_true, flipped, 0);
}

inline ClassificationScores classification_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                                   const std::vector<double>& scores) {
  const std::size_t n = y_true.size();
  if (y_pred.size() != n || scores.size() != n) throw DimensionMismatch("classification inputs differ in length");
  if (n == 0) throw InvalidArgument("classification metrics of an empty set");
  for (std::size_t i = 0; i < n; ++i) {
    if ((y_true[i] != 0 && y_true[i] != 1) || (y_pred[i] != 0 && y_pred[i] != 1))
      throw InvalidArgument("labels must be 0 or 1");
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) throw InvalidArgument("scores must lie in [0, 1]");
  }
  ClassificationScores out;
  double correct = 0.0;
  for (std::size_t i = 0; i < n; ++i) correct += y_true[i] == y_pred[i] ? 1.0 : 0.0;
  out.accuracy = correct / static_cast<double>(n);

  for (int c : {0, 1}) {
    double tp = 0.0, fp = 0.0, fn = 0.0, support = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool actual = y_true[i] == c;
      const bool predicted = y_pred[i] == c;
      support += actual ? 1.0 : 0.0;
      tp += actual && predicted ? 1.0 : 0.0;
      fp += !actual && predicted ? 1.0 : 0.0;
      fn += actual && !predicted ? 1.0 : 0.0;
    }
    const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    out.weighted_f1 += support / static_cast<double>(n) * f1;
  }

  const bool both = std::count(y_true.begin(), y_true.end(), 1) > 0 && std::count(y_true.begin(), y_true.end(), 0) > 0;
  if (both) out.weighted_auc = weighted_auc(y_true, scores);
  return out;
}

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1); 0 for a single value
};

inline SummaryStats summarize(const std::vector<double>& values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace ccafuse
