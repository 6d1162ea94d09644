#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ccafuse/error.hpp"

namespace ccafuse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Features-by-samples matrix with identifiers. Immutable after construction.
///
/// A single-sample matrix is accepted so that embeddings can be applied to one
/// new observation; everything that estimates statistics requires two or more.
class DataMatrix {
 public:
  DataMatrix(Matrix values, std::vector<std::string> feature_names, std::vector<std::string> sample_ids)
      : values_(std::move(values)),
        feature_names_(std::move(feature_names)),
        sample_ids_(std::move(sample_ids)) {
    if (values_.rows() < 1 || values_.cols() < 1)
      throw InvalidArgument("data matrix needs at least one feature and one sample");
    if (static_cast<Eigen::Index>(feature_names_.size()) != values_.rows())
      throw DimensionMismatch("feature name count " + std::to_string(feature_names_.size()) +
                              " != row count " + std::to_string(values_.rows()));
    if (static_cast<Eigen::Index>(sample_ids_.size()) != values_.cols())
      throw DimensionMismatch("sample id count " + std::to_string(sample_ids_.size()) +
                              " != column count " + std::to_string(values_.cols()));
    if (!values_.allFinite()) throw InvalidArgument("data matrix contains NaN or Inf");
    require_unique(feature_names_, "feature name");
    require_unique(sample_ids_, "sample id");
  }

  /// Default identifiers f1..fp / s1..sn.
  static DataMatrix with_default_names(Matrix values, const std::string& feature_prefix = "f",
                                       const std::string& sample_prefix = "s") {
    std::vector<std::string> features(static_cast<std::size_t>(values.rows()));
    std::vector<std::string> samples(static_cast<std::size_t>(values.cols()));
    for (std::size_t i = 0; i < features.size(); ++i) features[i] = feature_prefix + std::to_string(i + 1);
    for (std::size_t j = 0; j < samples.size(); ++j) samples[j] = sample_prefix + std::to_string(j + 1);
    return DataMatrix(std::move(values), std::move(features), std::move(samples));
  }

  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }
  Eigen::Index features() const noexcept { return values_.rows(); }
  Eigen::Index samples() const noexcept { return values_.cols(); }

  /// Same features, values replaced (shape must match).
  DataMatrix with_values(Matrix values) const {
    return DataMatrix(std::move(values), feature_names_, sample_ids_);
  }

  DataMatrix select_samples(const std::vector<std::size_t>& columns) const {
    Matrix out(values_.rows(), static_cast<Eigen::Index>(columns.size()));
    std::vector<std::string> ids;
    ids.reserve(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      out.col(static_cast<Eigen::Index>(j)) = values_.col(static_cast<Eigen::Index>(columns[j]));
      ids.push_back(sample_ids_.at(columns[j]));
    }
    return DataMatrix(std::move(out), feature_names_, std::move(ids));
  }

 private:
  static void require_unique(const std::vector<std::string>& names, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& n : names)
      if (!seen.insert(n).second) throw InvalidArgument(std::string("duplicate ") + what + " '" + n + "'");
  }

  Matrix values_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> sample_ids_;
};

struct CovarianceSet {
  Matrix sigma_x;
  Matrix sigma_y;
  Matrix sigma_xy;
};

enum class PreprocessMode { none, center, zscore };

/// Per-feature statistics estimated on one partition and re-applied to others.
struct PreprocessStats {
  PreprocessMode mode = PreprocessMode::none;
  Vector means;
  Vector scales;  // sample standard deviations; ones unless zscore
};

namespace detail {

// Numerically zero spread: exact zeros after centering, or pure rounding noise.
inline bool is_constant_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double mean = row.mean();
  const double spread = (row.array() - mean).matrix().norm();
  const double scale = std::max(std::abs(mean), row.cwiseAbs().maxCoeff());
  return spread <= 1e-13 * scale * std::sqrt(static_cast<double>(row.size())) || spread == 0.0;
}

}  // namespace detail

inline PreprocessStats fit_preprocess(const DataMatrix& m, PreprocessMode mode) {
  PreprocessStats stats;
  stats.mode = mode;
  const Eigen::Index p = m.features();
  stats.means = Vector::Zero(p);
  stats.scales = Vector::Ones(p);
  if (mode == PreprocessMode::none) return stats;
  if (m.samples() < 2) throw TooFewSamples("preprocessing needs at least two samples");
  stats.means = m.values().rowwise().mean();
  if (mode == PreprocessMode::zscore) {
    const auto n = static_cast<double>(m.samples());
    for (Eigen::Index i = 0; i < p; ++i) {
      if (detail::is_constant_row(m.values().row(i)))
        throw ZeroVarianceFeature(m.feature_names()[static_cast<std::size_t>(i)]);
      stats.scales(i) = std::sqrt((m.values().row(i).array() - stats.means(i)).square().sum() / (n - 1.0));
    }
  }
  return stats;
}

inline DataMatrix apply_preprocess(const DataMatrix& m, const PreprocessStats& stats) {
  if (stats.mode == PreprocessMode::none) return m;
  if (stats.means.size() != m.features())
    throw DimensionMismatch("preprocessing statistics do not match feature count");
  Matrix out = m.values().colwise() - stats.means;
  if (stats.mode == PreprocessMode::zscore) out = stats.scales.cwiseInverse().asDiagonal() * out;
  return m.with_values(std::move(out));
}

inline DataMatrix preprocess(const DataMatrix& m, PreprocessMode mode) {
  return apply_preprocess(m, fit_preprocess(m, mode));
}

inline void require_same_samples(const DataMatrix& x, const DataMatrix& y) {
  if (x.samples() != y.samples())
    throw SampleMismatch("sample counts differ: " + std::to_string(x.samples()) + " vs " +
                         std::to_string(y.samples()));
  for (std::size_t j = 0; j < x.sample_ids().size(); ++j)
    if (x.sample_ids()[j] != y.sample_ids()[j])
      throw SampleMismatch("sample order differs at position " + std::to_string(j) + ": '" +
                           x.sample_ids()[j] + "' vs '" + y.sample_ids()[j] + "'");
}

/// Unscaled second-moment matrices X Xᵀ, Y Yᵀ, X Yᵀ of already-preprocessed data.
inline CovarianceSet covariances(const DataMatrix& x, const DataMatrix& y) {
  require_same_samples(x, y);
  CovarianceSet cov;
  const Matrix& xv = x.values();
  const Matrix& yv = y.values();
  cov.sigma_x = Matrix(xv.rows(), xv.rows());
  cov.sigma_x.setZero();
  cov.sigma_x.selfadjointView<Eigen::Lower>().rankUpdate(xv);
  cov.sigma_x = cov.sigma_x.selfadjointView<Eigen::Lower>();
  cov.sigma_y = Matrix(yv.rows(), yv.rows());
  cov.sigma_y.setZero();
  cov.sigma_y.selfadjointView<Eigen::Lower>().rankUpdate(yv);
  cov.sigma_y = cov.sigma_y.selfadjointView<Eigen::Lower>();
  cov.sigma_xy = xv * yv.transpose();
  return cov;
}

/// Relative jitter steps tried (times trace/n) when a Cholesky factorization fails.
inline constexpr std::array<double, 3> kJitterLadder{1e-10, 1e-8, 1e-6};

/// Solves a x = b for symmetric positive-definite a via LLᵀ, adding trace-scaled
/// diagonal jitter only when the plain factorization breaks down.
inline Vector spd_solve(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw DimensionMismatch("spd_solve: system is " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " with rhs of length " + std::to_string(b.size()));
  auto attempt = [&b](const Matrix& m, Vector& out) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) return false;
    out = llt.solve(b);
    return out.allFinite();
  };
  Vector x;
  if (attempt(a, x)) return x;
  const double mean_diag = a.trace() / static_cast<double>(a.rows());
  for (double step : kJitterLadder) {
    Matrix jittered = a;
    jittered.diagonal().array() += step * mean_diag;
    if (mean_diag > 0.0 && attempt(jittered, x)) return x;
  }
  throw NotPositiveDefinite("Cholesky factorization failed after jitter retries (n = " +
                            std::to_string(a.rows()) + ")");
}

/// sign(v) * max(|v| - delta, 0), entrywise.
inline Vector soft_threshold(const Vector& v, double delta) {
  if (delta < 0.0) throw InvalidArgument("soft_threshold: negative threshold");
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double mag = std::abs(v(j)) - delta;
    out(j) = mag > 0.0 ? std::copysign(mag, v(j)) : 0.0;
  }
  return out;
}

}  // namespace ccafuse
