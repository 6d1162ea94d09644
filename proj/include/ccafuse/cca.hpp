#pragma once

// Canonical correlation solvers.
//
// All solvers work on the unscaled second-moment matrices of centered data
// (see covariances()). Directions are reported with uᵀΣx u = vᵀΣy v = 1 and a
// canonical sign: the largest-magnitude entry of u is positive.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccafuse/error.hpp"
#include "ccafuse/graph.hpp"
#include "ccafuse/matrix.hpp"

namespace ccafuse {

/// Weights of the graph-regularized objective plus solver controls.
struct GccaParams {
  double alpha1 = 1.0, beta1 = 0.0, lambda1 = 0.0;
  double alpha2 = 1.0, beta2 = 0.0, lambda2 = 0.0;
  double epsilon_reweight = 1e-6;
  double tol = 1e-6;
  int max_iter = 500;
  /// Rescale each iterate to unit Σ-norm. With this off the iterates follow
  /// the raw alternating updates, whose magnitude drifts geometrically.
  bool normalize_iterates = true;

  static GccaParams symmetric(double alpha, double beta, double lambda) {
    GccaParams p;
    p.alpha1 = p.alpha2 = alpha;
    p.beta1 = p.beta2 = beta;
    p.lambda1 = p.lambda2 = lambda;
    return p;
  }

  void validate() const {
    const double all[] = {alpha1, beta1, lambda1, alpha2, beta2, lambda2};
    for (double v : all)
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("GCCA weights must be finite and nonnegative");
    if (alpha1 + beta1 + lambda1 <= 0.0 || alpha2 + beta2 + lambda2 <= 0.0)
      throw InvalidArgument("each modality needs a positive alpha + beta + lambda");
    if (!(epsilon_reweight > 0.0) || !(tol > 0.0)) throw InvalidArgument("epsilon_reweight and tol must be positive");
    if (max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
  }

  friend bool operator==(const GccaParams&, const GccaParams&) = default;
};

/// ℓ1 bounds and controls for the penalized-matrix-decomposition baseline.
struct SccaParams {
  double c1 = 1.0;
  double d1 = 1.0;
  double tol = 1e-6;
  int max_iter = 500;

  void validate() const {
    if (!(c1 > 0.0) || !(d1 > 0.0)) throw InvalidArgument("SCCA bounds must be positive");
    if (!(tol > 0.0) || max_iter < 1) throw InvalidArgument("invalid SCCA solver controls");
  }

  friend bool operator==(const SccaParams&, const SccaParams&) = default;
};

struct CanonicalPair {
  Vector u;
  Vector v;
  double rho_train = 0.0;
  int iterations = 0;
  bool converged = false;
};

enum class CcaMethod { kgcca, kscca };
enum class DeflationMode { literal, projective };

struct EmbeddingModel {
  Matrix u_matrix;  // p x K
  Matrix v_matrix;  // q x K
  int k = 0;
  Vector per_component_rho;
  CcaMethod method = CcaMethod::kgcca;
  GccaParams params;                // used when method == kgcca
  std::optional<SccaParams> scca;   // set when method == kscca
  std::vector<std::string> feature_names_x;
  std::vector<std::string> feature_names_y;
};

namespace detail {

inline double pearson_unchecked(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  const double denom = ac.norm() * bc.norm();
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(ac.dot(bc) / denom, -1.0, 1.0);
}

inline void canonicalize_sign(Vector& u, Vector& v) {
  Eigen::Index arg = 0;
  u.cwiseAbs().maxCoeff(&arg);
  if (u(arg) < 0.0) {
    u = -u;
    v = -v;
  }
}

inline double quad_form(const Matrix& m, const Vector& x) { return x.dot(m * x); }

// Scales x so that xᵀ m x = 1.
inline Vector sigma_normalize(const Matrix& m, const Vector& x, const char* which) {
  const double q = quad_form(m, x);
  if (!(q > 0.0) || !std::isfinite(q))
    throw DegenerateSolution(std::string(which) + " has zero variance under its covariance");
  return x / std::sqrt(q);
}

inline double covariance_correlation(const CovarianceSet& cov, const Vector& u, const Vector& v) {
  const double denom = std::sqrt(quad_form(cov.sigma_x, u) * quad_form(cov.sigma_y, v));
  if (!(denom > 0.0)) return 0.0;
  return std::clamp(u.dot(cov.sigma_xy * v) / denom, -1.0, 1.0);
}

inline void check_dimensions(const CovarianceSet& cov) {
  const auto p = cov.sigma_x.rows();
  const auto q = cov.sigma_y.rows();
  if (cov.sigma_x.cols() != p || cov.sigma_y.cols() != q || cov.sigma_xy.rows() != p || cov.sigma_xy.cols() != q)
    throw DimensionMismatch("inconsistent covariance dimensions");
}

// Inverse square root of a symmetric PSD matrix plus ridge.
inline Matrix inverse_sqrt(const Matrix& s, double ridge, const char* which) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  Vector eig = es.eigenvalues().array() + ridge;
  const double top = std::max(eig.maxCoeff(), 0.0);
  if (!(eig.minCoeff() > 1e-12 * top) || top == 0.0)
    throw SingularCovariance(std::string(which) + " is rank-deficient; use a positive ridge");
  return es.eigenvectors() * eig.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

inline double inf_change(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace detail

/// Whitened cross-covariance K_x Σxy K_y with K = (Σ + ridge·I)^{-1/2}; its
/// singular values are the canonical correlations.
struct WhitenedCca {
  Matrix whiten_x;
  Matrix whiten_y;
  Eigen::JacobiSVD<Matrix> svd;
};

inline WhitenedCca whitened_cca(const CovarianceSet& cov, double ridge) {
  if (ridge < 0.0) throw InvalidArgument("ridge must be nonnegative");
  detail::check_dimensions(cov);
  WhitenedCca w;
  w.whiten_x = detail::inverse_sqrt(cov.sigma_x, ridge, "Sigma_x");
  w.whiten_y = detail::inverse_sqrt(cov.sigma_y, ridge, "Sigma_y");
  const Matrix m = w.whiten_x * cov.sigma_xy * w.whiten_y;
  w.svd.compute(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return w;
}

/// All canonical correlations of (x, y), descending. Data are centered here.
inline Vector canonical_correlations(const DataMatrix& x, const DataMatrix& y, double ridge) {
  const auto cov = covariances(preprocess(x, PreprocessMode::center), preprocess(y, PreprocessMode::center));
  return whitened_cca(cov, ridge).svd.singularValues();
}

/// Leading canonical pair by singular decomposition. This is the closed-form
/// reference the iterative solvers are checked against. Centers internally.
inline CanonicalPair classical_cca(const DataMatrix& x, const DataMatrix& y, double ridge) {
  const DataMatrix xc = preprocess(x, PreprocessMode::center);
  const DataMatrix yc = preprocess(y, PreprocessMode::center);
  const auto cov = covariances(xc, yc);
  const auto w = whitened_cca(cov, ridge);
  CanonicalPair pair;
  pair.u = w.whiten_x * w.svd.matrixU().col(0);
  pair.v = w.whiten_y * w.svd.matrixV().col(0);
  const auto normalize = [ridge](const Matrix& s, const Vector& d, const char* which) {
    const double q = detail::quad_form(s, d);
    if (q > 0.0) return Vector(d / std::sqrt(q));
    const double qr = q + ridge * d.squaredNorm();
    if (!(qr > 0.0)) throw SingularCovariance(std::string(which) + " direction has zero variance");
    return Vector(d / std::sqrt(qr));
  };
  pair.u = normalize(cov.sigma_x, pair.u, "u");
  pair.v = normalize(cov.sigma_y, pair.v, "v");
  detail::canonicalize_sign(pair.u, pair.v);
  const Vector xs = xc.values().transpose() * pair.u;
  const Vector ys = yc.values().transpose() * pair.v;
  const double r = detail::pearson_unchecked(xs, ys);
  pair.rho_train = std::isfinite(r) ? r : 0.0;
  pair.converged = true;
  return pair;
}

/// One graph-regularized sparse canonical pair by alternating reweighted solves:
///   u ← (α1 Σx + β1 D_u + λ1 L1)⁻¹ Σxy v,  D_u = diag(1/(|u| + ε))
///   v ← (α2 Σy + β2 D_v + λ2 L2)⁻¹ Σxyᵀ u
/// starting from u = 1/p, v = 1/q, until both directions move less than tol
/// in ∞-norm. The returned directions satisfy uᵀΣx u = vᵀΣy v = 1.
inline CanonicalPair fit_1gcca(const CovarianceSet& cov, const GraphLaplacian& l1, const GraphLaplacian& l2,
                               const GccaParams& params) {
  params.validate();
  detail::check_dimensions(cov);
  const Eigen::Index p = cov.sigma_x.rows();
  const Eigen::Index q = cov.sigma_y.rows();
  if (l1.size() != p || l2.size() != q)
    throw DimensionMismatch("Laplacian sizes (" + std::to_string(l1.size()) + ", " + std::to_string(l2.size()) +
                            ") do not match covariance sizes (" + std::to_string(p) + ", " + std::to_string(q) + ")");

  // Fixed parts of the two system matrices.
  const Matrix base_u = params.alpha1 * cov.sigma_x + params.lambda1 * l1.matrix();
  const Matrix base_v = params.alpha2 * cov.sigma_y + params.lambda2 * l2.matrix();
  const double eps = params.epsilon_reweight;

  Vector u = Vector::Constant(p, 1.0 / static_cast<double>(p));
  Vector v = Vector::Constant(q, 1.0 / static_cast<double>(q));

  const auto step = [eps](const Matrix& base, double beta, const Vector& prev, const Vector& rhs) {
    if (beta == 0.0) return spd_solve(base, rhs);
    Matrix system = base;
    system.diagonal().array() += beta / (prev.array().abs() + eps);
    return spd_solve(system, rhs);
  };
  const auto guard = [](const Vector& d, const char* which) {
    if (!d.allFinite()) throw DegenerateSolution(std::string(which) + " became non-finite");
    if (d.norm() < 1e-12) throw DegenerateSolution(std::string(which) + " collapsed to zero");
  };

  CanonicalPair pair;
  for (int it = 1; it <= params.max_iter; ++it) {
    Vector u_next = step(base_u, params.beta1, u, cov.sigma_xy * v);
    guard(u_next, "u");
    if (params.normalize_iterates) u_next = detail::sigma_normalize(cov.sigma_x, u_next, "u");
    Vector v_next = step(base_v, params.beta2, v, cov.sigma_xy.transpose() * u_next);
    guard(v_next, "v");
    if (params.normalize_iterates) v_next = detail::sigma_normalize(cov.sigma_y, v_next, "v");

    const double change = std::max(detail::inf_change(u_next, u), detail::inf_change(v_next, v));
    u = std::move(u_next);
    v = std::move(v_next);
    pair.iterations = it;
    if (change < params.tol) {
      pair.converged = true;
      break;
    }
  }

  pair.u = detail::sigma_normalize(cov.sigma_x, u, "u");
  pair.v = detail::sigma_normalize(cov.sigma_y, v, "v");
  detail::canonicalize_sign(pair.u, pair.v);
  pair.rho_train = detail::covariance_correlation(cov, pair.u, pair.v);
  return pair;
}

struct Deflation {
  Matrix sigma_xy;              // deflated and Frobenius-renormalized
  double residual_norm = 0.0;   // Frobenius norm before renormalization
};

/// Removes the rank-one direction u vᵀ from Σxy, then renormalizes to unit
/// Frobenius norm. Projective mode uses the unit-norm projector; literal mode
/// divides the inner product by ‖u vᵀ‖ only once.
inline Deflation deflate(const Matrix& sigma_xy, const Vector& u, const Vector& v,
                         DeflationMode mode = DeflationMode::projective) {
  if (sigma_xy.rows() != u.size() || sigma_xy.cols() != v.size())
    throw DimensionMismatch("deflate: direction sizes do not match Sigma_xy");
  const double un = u.norm();
  const double vn = v.norm();
  if (un == 0.0 || vn == 0.0) throw ZeroVector("deflate: zero direction");
  const double rank_one_norm = un * vn;  // ‖u vᵀ‖_F
  const double inner = u.dot(sigma_xy * v);  // ⟨Σxy, u vᵀ⟩
  Deflation out;
  if (mode == DeflationMode::projective) {
    const Vector uh = u / un;
    const Vector vh = v / vn;
    out.sigma_xy = sigma_xy - uh.dot(sigma_xy * vh) * (uh * vh.transpose());
  } else {
    out.sigma_xy = sigma_xy - (inner / rank_one_norm) * (u * v.transpose());
  }
  out.residual_norm = out.sigma_xy.norm();
  const double scale = std::max(sigma_xy.norm(), std::numeric_limits<double>::min());
  if (out.residual_norm <= 1e-12 * scale) throw ZeroMatrix("deflated cross-covariance vanished");
  out.sigma_xy /= out.residual_norm;
  return out;
}

namespace detail {

template <typename FitOne>
EmbeddingModel fit_deflated(const DataMatrix& x, const DataMatrix& y, int k, DeflationMode mode, FitOne&& fit_one) {
  require_same_samples(x, y);
  const Eigen::Index p = x.features();
  const Eigen::Index q = y.features();
  const Eigen::Index n = x.samples();
  if (k < 1 || k > std::min({p, q, n}))
    throw InvalidArgument("k = " + std::to_string(k) + " must lie in [1, min(p, q, n)]");
  CovarianceSet cov = covariances(x, y);
  EmbeddingModel model;
  model.k = k;
  model.u_matrix.resize(p, k);
  model.v_matrix.resize(q, k);
  model.per_component_rho.resize(k);
  model.feature_names_x = x.feature_names();
  model.feature_names_y = y.feature_names();
  for (int j = 0; j < k; ++j) {
    try {
      const CanonicalPair pair = fit_one(cov);
      model.u_matrix.col(j) = pair.u;
      model.v_matrix.col(j) = pair.v;
      const Vector xs = x.values().transpose() * pair.u;
      const Vector ys = y.values().transpose() * pair.v;
      const double r = pearson_unchecked(xs, ys);
      model.per_component_rho(j) = std::isfinite(r) ? r : 0.0;
      if (j + 1 < k) cov.sigma_xy = deflate(cov.sigma_xy, pair.u, pair.v, mode).sigma_xy;
    } catch (const Error& e) {
      throw ComponentFailure(e, static_cast<std::size_t>(j));
    }
  }
  return model;
}

}  // namespace detail

/// K graph-regularized components via repeated fits and Hotelling-style
/// deflation of Σxy. Component correlations are measured on the data given.
inline EmbeddingModel fit_kgcca(const DataMatrix& x, const DataMatrix& y, const GraphLaplacian& l1,
                                const GraphLaplacian& l2, int k, const GccaParams& params,
                                DeflationMode mode = DeflationMode::projective) {
  params.validate();
  auto model = detail::fit_deflated(x, y, k, mode,
                                    [&](const CovarianceSet& cov) { return fit_1gcca(cov, l1, l2, params); });
  model.method = CcaMethod::kgcca;
  model.params = params;
  return model;
}

/// Unit-ℓ2 soft-thresholded direction S(x, Δ)/‖S(x, Δ)‖ with the smallest
/// Δ (30 bisection steps on [0, ‖x‖∞]) that brings the ℓ1 norm under `bound`.
inline Vector sparse_unit_direction(const Vector& x, double bound) {
  const double norm = x.norm();
  if (!(norm > 0.0)) throw DegenerateSolution("SCCA update is the zero vector");
  Vector unit = x / norm;
  if (unit.lpNorm<1>() <= bound) return unit;
  const auto feasible = [&](double delta, Vector& out) {
    out = soft_threshold(x, delta);
    const double n2 = out.norm();
    if (n2 == 0.0) return false;
    out /= n2;
    return out.lpNorm<1>() <= bound;
  };
  double lo = 0.0;
  double hi = x.cwiseAbs().maxCoeff();
  Vector best;
  Vector trial;
  for (int i = 0; i < 30; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid, trial)) {
      hi = mid;
      best = trial;
    } else {
      lo = mid;
    }
  }
  if (best.size() == 0) throw DegenerateSolution("soft-thresholding zeroed the whole direction");
  return best;
}

/// Sparse CCA baseline: penalized matrix decomposition of Σxy with ℓ1 bounds.
inline CanonicalPair fit_1scca(const CovarianceSet& cov, const SccaParams& params) {
  params.validate();
  detail::check_dimensions(cov);
  const Eigen::Index p = cov.sigma_x.rows();
  const Eigen::Index q = cov.sigma_y.rows();
  Vector u = Vector::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
  Vector v = Vector::Constant(q, 1.0 / std::sqrt(static_cast<double>(q)));
  CanonicalPair pair;
  for (int it = 1; it <= params.max_iter; ++it) {
    Vector u_next = sparse_unit_direction(cov.sigma_xy * v, params.c1);
    Vector v_next = sparse_unit_direction(cov.sigma_xy.transpose() * u_next, params.d1);
    const double change = std::max(detail::inf_change(u_next, u), detail::inf_change(v_next, v));
    u = std::move(u_next);
    v = std::move(v_next);
    pair.iterations = it;
    if (change < params.tol) {
      pair.converged = true;
      break;
    }
  }
  pair.u = detail::sigma_normalize(cov.sigma_x, u, "u");
  pair.v = detail::sigma_normalize(cov.sigma_y, v, "v");
  detail::canonicalize_sign(pair.u, pair.v);
  pair.rho_train = detail::covariance_correlation(cov, pair.u, pair.v);
  return pair;
}

inline CanonicalPair fit_1scca(const CovarianceSet& cov, double c1, double d1) {
  SccaParams params;
  params.c1 = c1;
  params.d1 = d1;
  return fit_1scca(cov, params);
}

inline EmbeddingModel fit_kscca(const DataMatrix& x, const DataMatrix& y, int k, const SccaParams& params,
                                DeflationMode mode = DeflationMode::projective) {
  params.validate();
  auto model = detail::fit_deflated(x, y, k, mode, [&](const CovarianceSet& cov) { return fit_1scca(cov, params); });
  model.method = CcaMethod::kscca;
  model.scca = params;
  return model;
}

struct FusedEmbedding {
  Matrix x_embedded;  // K x n
  Matrix y_embedded;  // K x n
  Matrix fused;       // 2K x n, x block on top
  std::vector<std::string> sample_ids;
};

inline void require_feature_names(const std::vector<std::string>& expected, const std::vector<std::string>& got) {
  const std::size_t common = std::min(expected.size(), got.size());
  for (std::size_t i = 0; i < common; ++i)
    if (expected[i] != got[i]) throw FeatureMismatch(got[i]);
  if (expected.size() != got.size())
    throw FeatureMismatch(got.size() > common ? got[common] : expected[common]);
}

/// Z_e = [Uᵀ X; Vᵀ Y].
inline FusedEmbedding transform(const EmbeddingModel& model, const DataMatrix& x, const DataMatrix& y) {
  require_feature_names(model.feature_names_x, x.feature_names());
  require_feature_names(model.feature_names_y, y.feature_names());
  require_same_samples(x, y);
  FusedEmbedding out;
  out.x_embedded = model.u_matrix.transpose() * x.values();
  out.y_embedded = model.v_matrix.transpose() * y.values();
  out.fused.resize(2 * model.k, x.samples());
  out.fused.topRows(model.k) = out.x_embedded;
  out.fused.bottomRows(model.k) = out.y_embedded;
  out.sample_ids = x.sample_ids();
  return out;
}

}  // namespace ccafuse
