#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ccafuse/error.hpp"
#include "ccafuse/matrix.hpp"

namespace ccafuse {

struct Edge {
  std::string node_a;
  std::string node_b;
  double weight = 0.0;
};

/// Undirected weighted edges. Self-loops are rejected at construction;
/// negative weights are rejected when a Laplacian is built.
class EdgeList {
 public:
  EdgeList() = default;
  explicit EdgeList(std::vector<Edge> edges) : edges_(std::move(edges)) {
    for (const auto& e : edges_) {
      if (e.node_a == e.node_b) throw InvalidArgument("self-loop on node '" + e.node_a + "'");
      if (!std::isfinite(e.weight)) throw InvalidArgument("non-finite weight on edge " + e.node_a + "-" + e.node_b);
    }
  }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return edges_.size(); }

 private:
  std::vector<Edge> edges_;
};

/// L = D - W over one modality's features.
class GraphLaplacian {
 public:
  GraphLaplacian(Matrix matrix, std::vector<std::string> node_names)
      : matrix_(std::move(matrix)), node_names_(std::move(node_names)) {
    if (matrix_.rows() != matrix_.cols())
      throw DimensionMismatch("Laplacian must be square");
    if (static_cast<Eigen::Index>(node_names_.size()) != matrix_.rows())
      throw DimensionMismatch("Laplacian node name count does not match its size");
  }

  /// Builds diag(W·1) - W from a symmetric nonnegative adjacency.
  static GraphLaplacian from_adjacency(const Matrix& adjacency, std::vector<std::string> node_names) {
    Matrix l = -adjacency;
    l.diagonal() = adjacency.rowwise().sum() - adjacency.diagonal();
    return GraphLaplacian(std::move(l), std::move(node_names));
  }

  /// Empty graph (all zeros) over the given nodes.
  static GraphLaplacian zero(std::vector<std::string> node_names) {
    const auto m = static_cast<Eigen::Index>(node_names.size());
    return GraphLaplacian(Matrix::Zero(m, m), std::move(node_names));
  }

  const Matrix& matrix() const noexcept { return matrix_; }
  const std::vector<std::string>& node_names() const noexcept { return node_names_; }
  Eigen::Index size() const noexcept { return matrix_.rows(); }

 private:
  Matrix matrix_;
  std::vector<std::string> node_names_;
};

/// Squared Pearson correlation between feature rows, zero diagonal.
/// Weights strictly below `min_weight` are dropped (0 keeps the dense graph).
inline Matrix squared_correlation_adjacency(const DataMatrix& m, double min_weight = 0.0) {
  const Matrix& values = m.values();
  if (m.samples() < 2) throw TooFewSamples("correlation graph needs at least two samples");
  Matrix z = values.colwise() - values.rowwise().mean();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (detail::is_constant_row(values.row(i)))
      throw ZeroVarianceFeature(m.feature_names()[static_cast<std::size_t>(i)]);
    z.row(i) /= z.row(i).norm();
  }
  Matrix corr = z * z.transpose();
  Matrix w = corr.array().square().min(1.0).matrix();
  w = (0.5 * (w + w.transpose())).eval();
  w.diagonal().setZero();
  if (min_weight > 0.0) w = (w.array() < min_weight).select(0.0, w);
  return w;
}

inline GraphLaplacian laplacian_from_data(const DataMatrix& m, double min_weight = 0.0) {
  return GraphLaplacian::from_adjacency(squared_correlation_adjacency(m, min_weight), m.feature_names());
}

struct EdgeLaplacian {
  GraphLaplacian laplacian;
  std::size_t skipped_edges = 0;  // edges with an endpoint outside the feature set
};

inline EdgeLaplacian laplacian_from_edges(const EdgeList& edges, const std::vector<std::string>& feature_names) {
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < feature_names.size(); ++i)
    if (!index.emplace(feature_names[i], static_cast<Eigen::Index>(i)).second)
      throw InvalidArgument("duplicate feature name '" + feature_names[i] + "'");
  const auto m = static_cast<Eigen::Index>(feature_names.size());
  Matrix w = Matrix::Zero(m, m);
  std::size_t skipped = 0;
  for (const auto& e : edges.edges()) {
    if (e.weight < 0.0)
      throw NegativeWeight("edge " + e.node_a + "-" + e.node_b + " has weight " + std::to_string(e.weight));
    const auto a = index.find(e.node_a);
    const auto b = index.find(e.node_b);
    if (a == index.end() || b == index.end()) {
      ++skipped;
      continue;
    }
    w(a->second, b->second) += e.weight;
    w(b->second, a->second) += e.weight;
  }
  return {GraphLaplacian::from_adjacency(w, feature_names), skipped};
}

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const ValidationCheck& check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw InvalidArgument("no validation check named '" + name + "'");
  }
};

/// Measures every Laplacian invariant; failures are reported, never thrown.
inline ValidationReport validate_laplacian(const GraphLaplacian& l) {
  const Matrix& a = l.matrix();
  ValidationReport report;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);

  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  report.checks.push_back({"symmetry", asym <= 1e-12 * scale, asym, 1e-12 * scale});

  const double row_dev = a.rowwise().sum().cwiseAbs().maxCoeff();
  report.checks.push_back({"zero_row_sum", row_dev <= 1e-10, row_dev, 1e-10});

  Matrix off = a;
  off.diagonal().setZero();
  const double max_off = a.size() > 1 ? off.maxCoeff() : 0.0;
  report.checks.push_back({"nonpositive_off_diagonal", max_off <= 0.0, max_off, 0.0});

  const Matrix sym = 0.5 * (a + a.transpose());
  const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues();
  const double min_eig = eig.minCoeff();
  const double bound = -1e-8 * std::max(eig.maxCoeff(), 0.0);
  report.checks.push_back({"positive_semidefinite", min_eig >= bound, min_eig, bound});
  return report;
}

}  // namespace ccafuse
