// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ccafuse/ccafuse.hpp"
#include "support.hpp"

using namespace ccafuse;
using testing_support::gaussian;
using testing_support::naive_pearson;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << std::endl;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

GraphLaplacian zero_graph(Eigen::Index m) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < m; ++i) names.push_back("n" + std::to_string(i));
  return GraphLaplacian::zero(names);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// ------------------------------------------------------------------ oracles

double naive_cosine_distance(const Vector& a, const Vector& b) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += a(i) * b(i);
    na += a(i) * a(i);
    nb += b(i) * b(i);
  }
  return 1.0 - std::abs(dot) / std::sqrt(na * nb);
}

double naive_quadratic(const Matrix& l, const Vector& u) {
  double s = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    for (Eigen::Index j = 0; j < u.size(); ++j) s += u(i) * l(i, j) * u(j);
  return s;
}

Vector project(const Matrix& data, const Vector& w) {
  Vector out = Vector::Zero(data.cols());
  for (Eigen::Index s = 0; s < data.cols(); ++s)
    for (Eigen::Index i = 0; i < data.rows(); ++i) out(s) += w(i) * data(i, s);
  return out;
}

double pairwise_auc(const std::vector<int>& y, const std::vector<double>& s, int positive) {
  double good = 0, pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      if (y[i] == positive && y[j] != positive) {
        pairs += 1;
        good += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return good / pairs;
}

double naive_weighted_f1(const std::vector<int>& t, const std::vector<int>& p) {
  double total = 0;
  for (int c : {0, 1}) {
    int tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == c) ++support;
      if (t[i] == c && p[i] == c) ++tp;
      if (t[i] != c && p[i] == c) ++fp;
      if (t[i] == c && p[i] != c) ++fn;
    }
    const double f1 = tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
    total += f1 * support / static_cast<double>(t.size());
  }
  return total;
}

double naive_mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double naive_sd(const std::vector<double>& v) {
  const double m = naive_mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// ------------------------------------------------------------------ criteria

void criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0;
  for (int t = 0; t < 10; ++t) {
    const auto d = testing_support::latent_pair(8, 6, 300, 1, 1.5, rng);
    const auto pair = fit_1gcca(covariances(d.x, d.y), zero_graph(8), zero_graph(6), GccaParams::symmetric(1, 0, 0));
    worst = std::max(worst, std::abs(pair.rho_train - classical_cca(d.x, d.y, 0.0).rho_train));
  }
  const double secs = seconds_since(t0);
  report(1, worst <= 1e-3 && secs < 5.0, "max |rho_gcca - rho_cca| = " + fmt(worst) + ", " + fmt(secs) + " s");
}

void criterion2() {
  const auto t0 = Clock::now();
  BenchConfig config;
  config.settings = default_settings(0);
  config.repetitions = 5;
  const auto r = run_simulation_benchmark(config);
  const double secs = seconds_since(t0);
  const double dv_prior = aggregate_value(r.aggregates, "mean_d_cos_v", "1-GCCA-Prior");
  const double dv_scca = aggregate_value(r.aggregates, "mean_d_cos_v", "1-SCCA");
  const double re_prior = aggregate_value(r.aggregates, "mean_rho_error", "1-GCCA-Prior");
  const double re_scca = aggregate_value(r.aggregates, "mean_rho_error", "1-SCCA");
  const bool ok = r.failures.empty() && dv_prior < dv_scca && re_prior < re_scca && re_prior <= 0.15 && secs < 600;
  report(2, ok,
         "d_cos_v prior " + fmt(dv_prior) + " vs scca " + fmt(dv_scca) + "; |rho err| prior " + fmt(re_prior) +
             " vs scca " + fmt(re_scca) + " (bound 0.15); " + std::to_string(r.failures.size()) + " failed cells, " +
             fmt(secs) + " s");
}

void criterion3() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> size(2, 30);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const int p = size(rng), q = size(rng);
    const Matrix s = gaussian(p, q, rng);
    const Vector u = gaussian(p, 1, rng).col(0), v = gaussian(q, 1, rng).col(0);
    const Matrix d = deflate(s, u, v, DeflationMode::projective).sigma_xy;
    double inner = 0;
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < q; ++j) inner += u(i) * d(i, j) * v(j);
    worst = std::max(worst, std::abs(inner) / (u.norm() * v.norm() * d.norm()));
  }
  report(3, worst <= 1e-8, "max relative inner product " + fmt(worst));
}

bool laplacian_ok(const Matrix& l) {
  const Eigen::Index m = l.rows();
  double scale = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      if (std::abs(l(i, j) - l(j, i)) > 1e-12 * std::max(1.0, std::abs(l(i, j)))) return false;
      scale = std::max(scale, std::abs(l(i, j)));
    }
  for (Eigen::Index i = 0; i < m; ++i) {
    double row = 0;
    for (Eigen::Index j = 0; j < m; ++j) row += l(i, j);
    if (std::abs(row) > 1e-10) return false;
  }
  const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(l, Eigen::EigenvaluesOnly).eigenvalues();
  return eig.minCoeff() >= -1e-8 * std::max(eig.maxCoeff(), 0.0);
}

void criterion4() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> size(2, 40);
  std::uniform_real_distribution<double> weight(0.0, 5.0);
  int bad_edges = 0, bad_data = 0, lib_rejected = 0;
  for (int t = 0; t < 100; ++t) {
    const int m = size(rng);
    std::vector<std::string> names;
    for (int i = 0; i < m; ++i) names.push_back("g" + std::to_string(i));
    std::uniform_int_distribution<int> node(0, m - 1);
    std::vector<Edge> edges;
    const int count = size(rng) * 2;
    for (int e = 0; e < count; ++e) {
      const int a = node(rng), b = node(rng);
      if (a != b) edges.push_back({names[a], names[b], weight(rng)});
    }
    const auto l = laplacian_from_edges(EdgeList(edges), names).laplacian;
    bad_edges += !laplacian_ok(l.matrix());
    lib_rejected += !validate_laplacian(l).all_passed();
  }
  for (int t = 0; t < 100; ++t) {
    const int m = size(rng), n = 3 + size(rng);
    const auto l = laplacian_from_data(DataMatrix::with_default_names(gaussian(m, n, rng)));
    bad_data += !laplacian_ok(l.matrix());
    lib_rejected += !validate_laplacian(l).all_passed();
  }
  report(4, bad_edges == 0 && bad_data == 0 && lib_rejected == 0,
         std::to_string(bad_edges) + " edge-list and " + std::to_string(bad_data) + " data Laplacians failed, " +
             std::to_string(lib_rejected) + " rejected by validate_laplacian");
}

void criterion5() {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> size(2, 12);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0;
  const auto check = [&](double got, double want) { worst = std::max(worst, rel(got, want)); };
  for (int t = 0; t < 100; ++t) {
    const int p = size(rng), q = size(rng), n = 10 + size(rng);
    const Vector a = gaussian(p, 1, rng).col(0), b = gaussian(p, 1, rng).col(0);
    check(cosine_distance_abs(a, b), naive_cosine_distance(a, b));

    const Vector s1 = gaussian(n, 1, rng).col(0), s2 = gaussian(n, 1, rng).col(0);
    check(pearson(s1, s2), naive_pearson(s1, s2));

    const Matrix xv = gaussian(p, n, rng), yv = gaussian(q, n, rng);
    const auto x = DataMatrix::with_default_names(xv), y = DataMatrix::with_default_names(yv);
    const Vector ut = gaussian(p, 1, rng).col(0), uh = gaussian(p, 1, rng).col(0);
    const Vector vt = gaussian(q, 1, rng).col(0), vh = gaussian(q, 1, rng).col(0);
    check(correlation_error(ut, vt, uh, vh, x, y),
          std::abs(naive_pearson(project(xv, ut), project(yv, vt)) - naive_pearson(project(xv, uh), project(yv, vh))));

    const auto l = laplacian_from_data(x);
    const double qt = naive_quadratic(l.matrix(), ut), qh = naive_quadratic(l.matrix(), uh);
    check(spectral_frequency_ratio(ut, uh, l), std::abs(qt - qh) / std::abs(qt));

    EmbeddingModel model;
    model.k = 2;
    model.u_matrix = gaussian(p, 2, rng);
    model.v_matrix = gaussian(q, 2, rng);
    model.feature_names_x = x.feature_names();
    model.feature_names_y = y.feature_names();
    double rho_sum = 0;
    for (int k = 0; k < 2; ++k)
      rho_sum += std::abs(naive_pearson(project(xv, model.u_matrix.col(k)), project(yv, model.v_matrix.col(k))));
    check(sum_correlations(model, x, y), rho_sum);

    std::vector<int> truth(static_cast<std::size_t>(n)), pred(truth.size());
    std::vector<double> scores(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
      truth[i] = i < 2 ? static_cast<int>(i) : coin(rng);
      scores[i] = std::round(unit(rng) * 10) / 10;
      pred[i] = scores[i] >= 0.5;
    }
    const auto m = classification_metrics(truth, pred, scores);
    double correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == pred[i];
    check(m.accuracy, correct / n);
    check(m.weighted_f1, naive_weighted_f1(truth, pred));
    const double n1 = static_cast<double>(std::count(truth.begin(), truth.end(), 1));
    std::vector<double> flipped(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) flipped[i] = 1.0 - scores[i];
    check(m.weighted_auc.value_or(-1.0),
          n1 / n * pairwise_auc(truth, scores, 1) + (n - n1) / n * pairwise_auc(truth, flipped, 0));

    const std::vector<double> sample = testing_support::to_std(s1);
    const auto stats = summarize(sample);
    check(stats.mean, naive_mean(sample));
    check(stats.sd, naive_sd(sample));
  }
  report(5, worst <= 1e-10, "max relative deviation " + fmt(worst));
}

void criterion6() {
  const auto t0 = Clock::now();
  SimConfig sim;
  sim.n = 600;
  sim.p = 100;
  sim.q = 100;
  sim.sigma = 0.5;
  sim.seed = 6;
  const auto inst = generate(sim);
  std::vector<int> labels(static_cast<std::size_t>(sim.n));
  for (int i = 0; i < sim.n; ++i) labels[static_cast<std::size_t>(i)] = inst.weights(i) > 0;

  FusionConfig config;
  config.k = 10;
  config.baselines = true;
  config.seed = 6;
  config.forest.seed = 6;
  const auto folds = prepare_folds(inst.x, inst.y, std::nullopt, config);
  const auto methods = classify_folds(folds, labels, config);
  const double f1 = pooled_scores(methods.front(), labels, folds).weighted_f1;
  double early = -1;
  for (const auto& m : methods)
    if (m.method == "early_fusion") early = pooled_scores(m, labels, folds).weighted_f1;

  auto null = permutation_null_f1(folds, labels, config, 100, 66);
  std::sort(null.begin(), null.end());
  const double q95 = null[static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(null.size()))) - 1];
  const double secs = seconds_since(t0);
  report(6, f1 > q95 && f1 >= 0.7 && early >= 0.0 && secs < 180,
         "10-GCCA weighted F1 " + fmt(f1) + ", null 95th pct " + fmt(q95) + ", early fusion F1 " + fmt(early) + ", " +
             fmt(secs) + " s");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion7() {
  const auto t0 = Clock::now();
  const auto dir = std::filesystem::temp_directory_path() / "ccafuse_acceptance_bench";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  int codes[2];
  for (int i = 0; i < 2; ++i) {
    const std::string cmd = std::string(CCAFUSE_CLI) + " bench --settings default --reps 2 --seed 7 --out " +
                            (dir / ("run" + std::to_string(i) + ".csv")).string() + " > /dev/null";
    const int status = std::system(cmd.c_str());
    codes[i] = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  const auto a = slurp(dir / "run0.csv"), b = slurp(dir / "run1.csv");
  std::filesystem::remove_all(dir);
  report(7, codes[0] == 0 && codes[1] == 0 && !a.empty() && a == b,
         std::to_string(a.size()) + " bytes, identical: " + (a == b ? "yes" : "no") + ", " +
             fmt(seconds_since(t0)) + " s");
}

struct Labeled {
  Matrix z;
  std::vector<int> y;
};

Labeled xor_data(int n, std::mt19937_64& rng) {
  Labeled d{0.3 * gaussian(2, n, rng), std::vector<int>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    const double sx = (i % 2) ? 1.0 : -1.0;
    const double sy = ((i / 2) % 2) ? 1.0 : -1.0;
    d.z(0, i) += sx;
    d.z(1, i) += sy;
    d.y[static_cast<std::size_t>(i)] = (sx > 0) != (sy > 0);
  }
  return d;
}

Labeled two_clusters(int n, std::mt19937_64& rng) {
  Labeled d{gaussian(2, n, rng), std::vector<int>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    d.y[static_cast<std::size_t>(i)] = i % 2;
    if (i % 2) d.z.col(i).array() += 5.0;
  }
  return d;
}

void criterion8() {
  std::mt19937_64 rng(808);
  ForestConfig config;
  config.seed = 8;
  const auto xtr = xor_data(400, rng), xte = xor_data(400, rng);
  const auto xor_model = train_forest(xtr.z, xtr.y, config);
  const auto xp = predict_forest(xor_model, xte.z).labels;
  double hits = 0;
  for (std::size_t i = 0; i < xp.size(); ++i) hits += xp[i] == xte.y[i];
  const double acc = hits / static_cast<double>(xp.size());

  const auto ctr = two_clusters(200, rng), cte = two_clusters(200, rng);
  const auto cp = predict_forest(train_forest(ctr.z, ctr.y, config), cte.z);
  const double f1 = naive_weighted_f1(cte.y, cp.labels);

  const bool same = train_forest(xtr.z, xtr.y, config).trees == xor_model.trees;
  report(8, acc >= 0.9 && f1 >= 0.95 && same,
         "XOR accuracy " + fmt(acc) + ", separable F1 " + fmt(f1) + ", same-seed identical: " + (same ? "yes" : "no"));
}

void criterion9() {
  std::mt19937_64 rng(909);
  int mismatches = 0;
  for (int t = 0; t < 10; ++t) {
    const auto d = testing_support::latent_pair(12, 9, 150, 2, 1.0, rng);
    const auto l1 = laplacian_from_data(d.x), l2 = laplacian_from_data(d.y);
    const auto params = GccaParams::symmetric(1.0, 0.1, 1.0);
    const auto model = fit_kgcca(d.x, d.y, l1, l2, 1, params);
    const auto pair = fit_1gcca(covariances(d.x, d.y), l1, l2, params);
    mismatches += !(Vector(model.u_matrix.col(0)) == pair.u && Vector(model.v_matrix.col(0)) == pair.v);
  }
  report(9, mismatches == 0, std::to_string(mismatches) + " of 10 instances differ");
}

}  // namespace

int main() {
  const std::vector<void (*)()> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                         criterion6, criterion7, criterion8, criterion9};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("threw ") + e.what());
    }
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
