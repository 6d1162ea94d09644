#pragma once

// Test-side helpers. Random inputs come from std::mt19937_64 so that test data
// never depends on the library's own generator.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ccafuse/matrix.hpp"

namespace testing_support {

using ccafuse::DataMatrix;
using ccafuse::Matrix;
using ccafuse::Vector;

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = d(rng);
  return m;
}

inline Vector gaussian_vector(Eigen::Index n, std::mt19937_64& rng) { return gaussian(n, 1, rng).col(0); }

inline Matrix center_rows(const Matrix& m) { return m.colwise() - m.rowwise().mean(); }

/// Naive Pearson correlation with explicit loops.
inline double naive_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline double naive_pearson(const Vector& a, const Vector& b) { return naive_pearson(to_std(a), to_std(b)); }

/// Paired views sharing a rank-`r` latent signal, features x samples.
struct LatentPair {
  DataMatrix x;
  DataMatrix y;
  Matrix latent;  // r x n
};

inline LatentPair latent_pair(Eigen::Index p, Eigen::Index q, Eigen::Index n, Eigen::Index r, double noise,
                              std::mt19937_64& rng) {
  const Matrix w = gaussian(r, n, rng);
  const Matrix a = gaussian(p, r, rng);
  const Matrix b = gaussian(q, r, rng);
  Matrix x = a * w + noise * gaussian(p, n, rng);
  Matrix y = b * w + noise * gaussian(q, n, rng);
  return {DataMatrix::with_default_names(center_rows(x), "x"), DataMatrix::with_default_names(center_rows(y), "y"),
          w};
}

}  // namespace testing_support
