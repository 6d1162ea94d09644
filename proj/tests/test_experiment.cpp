#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "ccafuse/experiment.hpp"
#include "support.hpp"

using namespace ccafuse;
using testing_support::gaussian;

namespace {

// Feature 0 of each view carries a shared latent, feature 1 is independent noise.
PairedData signal_and_noise(Eigen::Index n, std::mt19937_64& rng) {
  const Matrix w = gaussian(1, n, rng);
  Matrix x(2, n), y(2, n);
  x.row(0) = w;
  x.row(1) = gaussian(1, n, rng);
  y.row(0) = w + 0.1 * gaussian(1, n, rng);
  y.row(1) = gaussian(1, n, rng);
  return {DataMatrix::with_default_names(testing_support::center_rows(x), "x"),
          DataMatrix::with_default_names(testing_support::center_rows(y), "y")};
}

GraphLaplacian penalty_on_first(Eigen::Index m) {
  Matrix l = Matrix::Zero(m, m);
  l(0, 0) = 1.0;
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < m; ++i) names.push_back("n" + std::to_string(i));
  return GraphLaplacian(l, names);
}

GraphLaplacian empty_graph(Eigen::Index m) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < m; ++i) names.push_back("n" + std::to_string(i));
  return GraphLaplacian::zero(names);
}

GridSpec gcca_grid(std::vector<double> alpha, std::vector<double> beta, std::vector<double> lambda) {
  GridSpec g;
  g.alpha1 = std::move(alpha);
  g.beta1 = std::move(beta);
  g.lambda1 = std::move(lambda);
  return g;
}

BenchConfig small_bench(int reps) {
  BenchConfig config;
  for (int l : {3, 6}) {
    SimConfig c;
    c.n = 200;
    c.p = 20;
    c.q = 20;
    c.l = l;
    c.seed = 17;
    config.settings.push_back(c);
  }
  config.repetitions = reps;
  config.grid = gcca_grid({0.1, 1.0}, {0.1}, {1.0});
  config.grid->c1 = {1.5, 3.0};
  config.grid->d1 = {1.5, 3.0};
  return config;
}

}  // namespace

TEST(GridSearch, SingleCandidate) {
  std::mt19937_64 rng(1);
  const auto train = signal_and_noise(200, rng), val = signal_and_noise(100, rng);
  const auto r = grid_search(train, val, empty_graph(2), empty_graph(2), gcca_grid({1}, {0.1}, {0.5}), SolverKind::gcca);
  ASSERT_EQ(r.candidates.size(), 1u);
  EXPECT_EQ(std::get<GccaParams>(r.best).lambda1, 0.5);
  EXPECT_EQ(r.best_score, *r.candidates[0].score);
  EXPECT_GT(r.best_score, 0.9);
}

TEST(GridSearch, SkipsFailingCandidate) {
  // alpha = 0 leaves lambda * L as the whole system matrix; with an empty
  // graph that is singular.
  std::mt19937_64 rng(2);
  const auto train = signal_and_noise(200, rng), val = signal_and_noise(100, rng);
  const auto r = grid_search(train, val, empty_graph(2), empty_graph(2), gcca_grid({0, 1}, {0}, {1}), SolverKind::gcca);
  ASSERT_EQ(r.candidates.size(), 2u);
  EXPECT_FALSE(r.candidates[0].score.has_value());
  EXPECT_NE(r.candidates[0].error.find("NotPositiveDefinite"), std::string::npos);
  EXPECT_TRUE(r.candidates[1].score.has_value());
  EXPECT_EQ(std::get<GccaParams>(r.best).alpha1, 1.0);
}

TEST(GridSearch, PicksTheSignalCarryingCandidate) {
  // A heavy penalty on the signal feature, relative to alpha, forces u onto
  // the noise feature; large alpha restores ordinary CCA.
  std::mt19937_64 rng(3);
  const auto train = signal_and_noise(300, rng), val = signal_and_noise(150, rng);
  const auto r = grid_search(train, val, penalty_on_first(2), empty_graph(2), gcca_grid({1e-6, 1e3}, {0}, {1}),
                             SolverKind::gcca, false);
  ASSERT_EQ(r.candidates.size(), 2u);
  EXPECT_LT(*r.candidates[0].score, 0.3);
  EXPECT_GT(*r.candidates[1].score, 0.9);
  EXPECT_EQ(std::get<GccaParams>(r.best).alpha1, 1e3);
}

TEST(GridSearch, TiesGoToSmallestTuple) {
  std::mt19937_64 rng(4);
  const auto train = signal_and_noise(200, rng), val = signal_and_noise(100, rng);
  GridSpec g;
  g.c1 = {5.0, std::sqrt(2.0)};  // both inactive for p = 2
  g.d1 = {std::sqrt(2.0)};
  const auto r = grid_search(train, val, empty_graph(2), empty_graph(2), g, SolverKind::scca);
  ASSERT_EQ(r.candidates.size(), 2u);
  EXPECT_EQ(*r.candidates[0].score, *r.candidates[1].score);
  EXPECT_EQ(std::get<SccaParams>(r.best).c1, std::sqrt(2.0));
}

TEST(GridSearch, AllCandidatesFailed) {
  std::mt19937_64 rng(5);
  const auto train = signal_and_noise(50, rng), val = signal_and_noise(20, rng);
  EXPECT_THROW(grid_search(train, val, empty_graph(2), empty_graph(2), gcca_grid({0}, {0}, {1, 2}), SolverKind::gcca),
               AllCandidatesFailed);
}

TEST(GridSearch, SumOfCorrelationsSelection) {
  std::mt19937_64 rng(6);
  const auto d = testing_support::latent_pair(6, 5, 300, 2, 1.0, rng);
  std::vector<std::size_t> head(200), rest(100);
  std::iota(head.begin(), head.end(), std::size_t{0});
  std::iota(rest.begin(), rest.end(), std::size_t{200});
  const PairedData train{d.x.select_samples(head), d.y.select_samples(head)};
  const PairedData val{d.x.select_samples(rest), d.y.select_samples(rest)};
  GridSpec g = gcca_grid({1}, {0.01}, {0.1});
  g.selection_metric = SelectionMetric::validation_sum_rho;
  g.components = 3;
  const auto r = grid_search(train, val, laplacian_from_data(train.x), laplacian_from_data(train.y), g,
                             SolverKind::gcca);
  EXPECT_EQ(r.best_model.k, 3);
  EXPECT_NEAR(r.best_score, sum_correlations(r.best_model, val.x, val.y), 1e-12);
}

TEST(GridSpec, DefaultsAndOrdering) {
  const auto g = GridSpec::defaults(100, 100);
  const auto pts = g.points(SolverKind::gcca);
  EXPECT_EQ(pts.size(), 64u);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto& a = std::get<GccaParams>(pts[i - 1]);
    const auto& b = std::get<GccaParams>(pts[i]);
    EXPECT_TRUE(std::tie(a.alpha1, a.beta1, a.lambda1) < std::tie(b.alpha1, b.beta1, b.lambda1));
    EXPECT_EQ(b.alpha1, b.alpha2);
    EXPECT_EQ(b.lambda1, b.lambda2);
  }
  EXPECT_EQ(g.points(SolverKind::scca).size(), 25u);
  EXPECT_EQ(g.c1, (std::vector<double>{1.0, 2.5, 5.0, 7.5, 10.0}));

  GridSpec asym = gcca_grid({1, 2}, {0.1}, {1});
  asym.alpha2 = {1, 3};
  asym.beta2 = {0.1};
  asym.lambda2 = {1};
  asym.symmetric = false;
  EXPECT_EQ(asym.points(SolverKind::gcca).size(), 4u);

  EXPECT_THROW(gcca_grid({}, {1}, {1}).validate(SolverKind::gcca), InvalidArgument);
  EXPECT_THROW(gcca_grid({0}, {0}, {0}).validate(SolverKind::gcca), InvalidArgument);
  EXPECT_THROW(gcca_grid({-1}, {0}, {1}).validate(SolverKind::gcca), InvalidArgument);
}

TEST(Benchmark, ZeroRepetitionsIsEmpty) {
  const auto r = run_simulation_benchmark(small_bench(0));
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.aggregates.empty());
  EXPECT_TRUE(r.failures.empty());
}

TEST(Benchmark, NearNoiselessPriorRecoversCorrelation) {
  BenchConfig config;
  SimConfig c;
  c.sigma = 1e-8;
  c.seed = 3;
  config.settings = {c};
  config.repetitions = 3;
  config.methods = {BenchMethod::gcca_prior};
  const auto r = run_simulation_benchmark(config);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_LE(aggregate_value(r.aggregates, "mean_rho_error", "1-GCCA-Prior"), 0.05);
}

TEST(Benchmark, RecordsCarryContext) {
  const auto r = run_simulation_benchmark(small_bench(2));
  EXPECT_TRUE(r.failures.empty());
  EXPECT_EQ(r.records.size(), 2u * 2u * 3u * 4u);
  const auto& first = r.records.front();
  EXPECT_EQ(first.name, "d_cos_u");
  EXPECT_EQ(first.tag("setting"), "l3_sigma0.5");
  EXPECT_EQ(first.tag("rep"), "0");
  EXPECT_EQ(first.tag("method"), "1-SCCA");
  for (const auto& rec : r.records) {
    EXPECT_TRUE(std::isfinite(rec.value));
    EXPECT_GE(rec.value, 0.0);
  }
}

TEST(Benchmark, AggregatesAreRecomputable) {
  const auto r = run_simulation_benchmark(small_bench(3));
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& rec : r.records) groups[{rec.tag("method"), rec.name}].push_back(rec.value);
  ASSERT_EQ(groups.size(), 12u);
  for (const auto& [key, values] : groups) {
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    EXPECT_NEAR(aggregate_value(r.aggregates, "mean_" + key.second, key.first), mean, 1e-10);
    EXPECT_NEAR(aggregate_value(r.aggregates, "sd_" + key.second, key.first), sd, 1e-10);
  }

  // Setting-averaged means are the mean of the per-setting means.
  for (const auto& [key, values] : groups) {
    double a = 0, b = 0;
    for (const auto& rec : r.aggregates)
      if (rec.name == "mean_" + key.second && rec.tag("method") == key.first && rec.tag("pooling") == "per_setting")
        (rec.tag("setting") == "l3_sigma0.5" ? a : b) = rec.value;
    EXPECT_NEAR(aggregate_value(r.aggregates, "mean_" + key.second, key.first, "setting_average"), 0.5 * (a + b),
                1e-10);
  }
}

TEST(Benchmark, OutputIsDeterministic) {
  const auto config = small_bench(2);
  std::ostringstream a, b;
  write_experiment_csv(a, run_simulation_benchmark(config));
  write_experiment_csv(b, run_simulation_benchmark(config));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_FALSE(a.str().empty());
}
