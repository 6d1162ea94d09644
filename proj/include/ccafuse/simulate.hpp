#pragma once

// Synthetic two-view benchmark with a planted canonical pair.
//
// u_true is a random combination of low-frequency eigenvectors of a unit-weight
// complete graph; v_true is a fixed block pattern. Each sample draws a latent
// w ~ N(0, 1) and observes X_i ~ N(u w, σ² I), Y_i ~ N(v w, σ² Σ_v) with
// Σ_v[i, j] = exp(-|v_i - v_j|).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ccafuse/error.hpp"
#include "ccafuse/graph.hpp"
#include "ccafuse/matrix.hpp"
#include "ccafuse/random.hpp"

namespace ccafuse {

struct SimConfig {
  int n = 1000;
  int p = 100;
  int q = 100;
  int l = 5;
  double sigma = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 3) throw InvalidArgument("simulation needs n >= 3");
    if (p < 2 || q < 10) throw InvalidArgument("simulation needs p >= 2 and q >= 10");
    if (l < 1 || l >= p) throw InvalidArgument("l must satisfy 1 <= l < p");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be positive");
  }
};

struct SimInstance {
  DataMatrix x;
  DataMatrix y;
  Vector u_true;
  Vector v_true;
  GraphLaplacian l_true;  // generator graph over X's features
  Vector weights;         // latent w_i
};

/// Random streams used by the generator, one per purpose.
enum class SimStream : std::uint64_t { u_weights = 1, latent = 2, x_noise = 3, y_noise = 4, split = 5 };

/// Block pattern {3, -1.5, 1, 2, 0} with block sizes 10/10/10/10/60 per 100
/// features (floor-scaled for other q, remainder to the zero block), unit norm.
inline Vector v_true_pattern(int q, bool normalize = true) {
  constexpr std::array<double, 4> kLevels{3.0, -1.5, 1.0, 2.0};
  Vector v = Vector::Zero(q);
  Eigen::Index pos = 0;
  const Eigen::Index block = (static_cast<Eigen::Index>(q) * 10) / 100;
  for (double level : kLevels) {
    v.segment(pos, block).setConstant(level);
    pos += block;
  }
  if (normalize) {
    const double norm = v.norm();
    if (norm == 0.0) throw InvalidArgument("q too small for the v pattern (need q >= 10)");
    v /= norm;
  }
  return v;
}

/// Laplacian of the complete graph on `names.size()` nodes with unit weights.
inline GraphLaplacian complete_graph_laplacian(std::vector<std::string> names) {
  const auto m = static_cast<Eigen::Index>(names.size());
  Matrix w = Matrix::Ones(m, m);
  w.diagonal().setZero();
  return GraphLaplacian::from_adjacency(w, std::move(names));
}

/// Eigenvectors of the `count` smallest nonzero eigenvalues, ascending. Within
/// a (numerically) degenerate eigenvalue group, vectors are ordered
/// lexicographically so the choice does not hinge on solver rounding order.
inline Matrix low_frequency_eigenvectors(const Matrix& laplacian, int count) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(laplacian);
  const Vector& eig = es.eigenvalues();
  const Matrix& vecs = es.eigenvectors();
  const double top = std::max(eig.maxCoeff(), 0.0);
  const double zero_tol = 1e-9 * std::max(top, 1.0);

  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < eig.size(); ++i)
    if (eig(i) > zero_tol) order.push_back(i);
  // Eigen returns ascending eigenvalues; sort each tie group lexicographically.
  const auto lex_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < vecs.rows(); ++r)
      if (vecs(r, a) != vecs(r, b)) return vecs(r, a) < vecs(r, b);
    return a < b;
  };
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && eig(order[end]) - eig(order[start]) <= zero_tol) ++end;
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end),
              lex_less);
    start = end;
  }
  if (static_cast<int>(order.size()) < count)
    throw InvalidArgument("graph has only " + std::to_string(order.size()) + " nonzero eigenvalues");
  Matrix basis(laplacian.rows(), count);
  for (int j = 0; j < count; ++j) basis.col(j) = vecs.col(order[static_cast<std::size_t>(j)]);
  return basis;
}

/// Symmetric square root factor R with R Rᵀ = cov (negative eigenvalues clipped).
inline Matrix psd_factor(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

/// n columns drawn from N(0, cov).
inline Matrix correlated_normal(const Matrix& cov, Eigen::Index n, RandomStream& stream) {
  Matrix z(cov.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < cov.rows(); ++i) z(i, j) = stream.normal();
  return psd_factor(cov) * z;
}

inline Matrix v_noise_covariance(const Vector& v) {
  const auto q = v.size();
  Matrix cov(q, q);
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < q; ++j) cov(i, j) = std::exp(-std::abs(v(i) - v(j)));
  return cov;
}

inline SimInstance generate(const SimConfig& config) {
  config.validate();
  const Eigen::Index n = config.n;
  const Eigen::Index p = config.p;
  const Eigen::Index q = config.q;

  std::vector<std::string> x_names(static_cast<std::size_t>(p));
  std::vector<std::string> y_names(static_cast<std::size_t>(q));
  std::vector<std::string> ids(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < x_names.size(); ++i) x_names[i] = "x" + std::to_string(i + 1);
  for (std::size_t i = 0; i < y_names.size(); ++i) y_names[i] = "y" + std::to_string(i + 1);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = "s" + std::to_string(i + 1);

  GraphLaplacian l_true = complete_graph_laplacian(x_names);
  const Matrix basis = low_frequency_eigenvectors(l_true.matrix(), config.l);

  RandomStream weight_stream(config.seed, static_cast<std::uint64_t>(SimStream::u_weights));
  Vector coeffs(config.l);
  for (int j = 0; j < config.l; ++j) coeffs(j) = weight_stream.normal();
  Vector u = basis * coeffs;
  u /= u.norm();

  const Vector v = v_true_pattern(config.q);

  RandomStream latent_stream(config.seed, static_cast<std::uint64_t>(SimStream::latent));
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = latent_stream.normal();

  RandomStream x_stream(config.seed, static_cast<std::uint64_t>(SimStream::x_noise));
  Matrix xv = u * w.transpose();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < p; ++i) xv(i, j) += config.sigma * x_stream.normal();

  RandomStream y_stream(config.seed, static_cast<std::uint64_t>(SimStream::y_noise));
  Matrix yv = v * w.transpose() + config.sigma * correlated_normal(v_noise_covariance(v), n, y_stream);

  return SimInstance{DataMatrix(std::move(xv), std::move(x_names), ids),
                     DataMatrix(std::move(yv), std::move(y_names), ids),
                     std::move(u),
                     v,
                     std::move(l_true),
                     std::move(w)};
}

struct PairedData {
  DataMatrix x;
  DataMatrix y;
};

struct DataSplit {
  PairedData train;
  PairedData validation;
  PairedData test;
};

/// Seeded shuffle, then floor-sized train/validation blocks with the rest as test.
inline DataSplit split(const DataMatrix& x, const DataMatrix& y, std::array<double, 3> fractions,
                       std::uint64_t seed) {
  require_same_samples(x, y);
  for (double f : fractions)
    if (!(f > 0.0)) throw InvalidArgument("split fractions must be positive");
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9)
    throw InvalidArgument("split fractions must sum to 1");
  const auto n = static_cast<std::size_t>(x.samples());
  const auto n_train = static_cast<std::size_t>(std::floor(fractions[0] * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::floor(fractions[1] * static_cast<double>(n)));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n)
    throw TooFewSamples(std::to_string(n) + " samples cannot fill every partition");

  RandomStream stream(seed, static_cast<std::uint64_t>(SimStream::split));
  const auto perm = random_permutation(n, stream);
  const std::vector<std::size_t> tr(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::size_t> va(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                                    perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  const std::vector<std::size_t> te(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  return DataSplit{{x.select_samples(tr), y.select_samples(tr)},
                   {x.select_samples(va), y.select_samples(va)},
                   {x.select_samples(te), y.select_samples(te)}};
}

}  // namespace ccafuse
