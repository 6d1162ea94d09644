#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ccafuse/cca.hpp"
#include "ccafuse/error.hpp"
#include "ccafuse/graph.hpp"
#include "ccafuse/io.hpp"
#include "ccafuse/matrix.hpp"
#include "ccafuse/metrics.hpp"
#include "ccafuse/parallel.hpp"
#include "ccafuse/simulate.hpp"

namespace ccafuse {

enum class SolverKind { gcca, scca };
enum class SelectionMetric { validation_rho, validation_sum_rho };

using GridPoint = std::variant<GccaParams, SccaParams>;

struct GridSpec {
  std::vector<double> alpha1, beta1, lambda1;
  std::vector<double> alpha2, beta2, lambda2;  // ignored when symmetric
  bool symmetric = true;                       // alpha2 = alpha1, beta2 = beta1, lambda2 = lambda1
  std::vector<double> c1, d1;
  SelectionMetric selection_metric = SelectionMetric::validation_rho;
  int components = 1;  // components fitted per candidate; >1 only matters for validation_sum_rho
  GccaParams gcca_controls;  // epsilon/tol/max_iter template
  SccaParams scca_controls;
  DeflationMode deflation = DeflationMode::projective;

  /// {0.01, 0.1, 1, 10} for each GCCA weight (symmetric) and ℓ1 bounds at
  /// {0.1, 0.25, 0.5, 0.75, 1}·√dim, floored at 1.
  static GridSpec defaults(Eigen::Index p, Eigen::Index q) {
    GridSpec g;
    g.alpha1 = g.beta1 = g.lambda1 = {0.01, 0.1, 1.0, 10.0};
    g.alpha2 = g.beta2 = g.lambda2 = g.alpha1;
    for (double f : {0.1, 0.25, 0.5, 0.75, 1.0}) {
      g.c1.push_back(std::max(1.0, f * std::sqrt(static_cast<double>(p))));
      g.d1.push_back(std::max(1.0, f * std::sqrt(static_cast<double>(q))));
    }
    g.c1.erase(std::unique(g.c1.begin(), g.c1.end()), g.c1.end());
    g.d1.erase(std::unique(g.d1.begin(), g.d1.end()), g.d1.end());
    return g;
  }

  /// Candidates in lexicographic order of their parameter tuple.
  std::vector<GridPoint> points(SolverKind kind) const {
    std::vector<GridPoint> out;
    const auto sorted = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      return v;
    };
    if (kind == SolverKind::scca) {
      for (double c : sorted(c1))
        for (double d : sorted(d1)) {
          SccaParams s = scca_controls;
          s.c1 = c;
          s.d1 = d;
          out.emplace_back(s);
        }
      return out;
    }
    const auto a1 = sorted(alpha1), b1 = sorted(beta1), l1 = sorted(lambda1);
    if (symmetric) {
      for (double a : a1)
        for (double b : b1)
          for (double l : l1) {
            GccaParams g = gcca_controls;
            g.alpha1 = g.alpha2 = a;
            g.beta1 = g.beta2 = b;
            g.lambda1 = g.lambda2 = l;
            out.emplace_back(g);
          }
      return out;
    }
    const auto a2 = sorted(alpha2), b2 = sorted(beta2), l2 = sorted(lambda2);
    for (double a : a1)
      for (double b : b1)
        for (double l : l1)
          for (double aa : a2)
            for (double bb : b2)
              for (double ll : l2) {
                GccaParams g = gcca_controls;
                g.alpha1 = a, g.beta1 = b, g.lambda1 = l;
                g.alpha2 = aa, g.beta2 = bb, g.lambda2 = ll;
                out.emplace_back(g);
              }
    return out;
  }

  void validate(SolverKind kind) const {
    if (components < 1) throw InvalidArgument("grid components must be positive");
    const auto pts = points(kind);
    if (pts.empty()) throw InvalidArgument("hyperparameter grid is empty");
    for (const auto& pt : pts) std::visit([](const auto& p) { p.validate(); }, pt);
  }
};

inline std::string describe(const GridPoint& point) {
  if (const auto* g = std::get_if<GccaParams>(&point))
    return "alpha1=" + format_double(g->alpha1) + " beta1=" + format_double(g->beta1) +
           " lambda1=" + format_double(g->lambda1) + " alpha2=" + format_double(g->alpha2) +
           " beta2=" + format_double(g->beta2) + " lambda2=" + format_double(g->lambda2);
  const auto& s = std::get<SccaParams>(point);
  return "c1=" + format_double(s.c1) + " d1=" + format_double(s.d1);
}

struct CandidateOutcome {
  GridPoint point;
  std::optional<double> score;  // empty when the fit failed
  std::string error;
};

struct GridResult {
  GridPoint best;
  double best_score = 0.0;
  EmbeddingModel best_model;
  std::vector<CandidateOutcome> candidates;
};

/// Fits a model for `point` on preprocessed training data.
inline EmbeddingModel fit_candidate(const PairedData& train, const GraphLaplacian& l1, const GraphLaplacian& l2,
                                    const GridPoint& point, int k, DeflationMode deflation) {
  if (const auto* g = std::get_if<GccaParams>(&point)) return fit_kgcca(train.x, train.y, l1, l2, k, *g, deflation);
  return fit_kscca(train.x, train.y, k, std::get<SccaParams>(point), deflation);
}

/// Fits every grid point on `train`, scores it on `val`, returns the best.
/// Ties go to the earliest (lexicographically smallest) candidate; failed
/// candidates are kept in the audit list and skipped.
inline GridResult grid_search(const PairedData& train, const PairedData& val, const GraphLaplacian& l1,
                              const GraphLaplacian& l2, const GridSpec& grid, SolverKind method,
                              bool parallel = true) {
  grid.validate(method);
  const auto pts = grid.points(method);
  const int k = grid.selection_metric == SelectionMetric::validation_sum_rho ? grid.components : 1;

  std::vector<CandidateOutcome> outcomes(pts.size());
  std::vector<std::optional<EmbeddingModel>> models(pts.size());
  auto evaluate = [&](std::size_t i) {
    outcomes[i].point = pts[i];
    try {
      EmbeddingModel model = fit_candidate(train, l1, l2, pts[i], k, grid.deflation);
      double score = 0.0;
      if (grid.selection_metric == SelectionMetric::validation_rho) {
        const Vector xs = val.x.values().transpose() * model.u_matrix.col(0);
        const Vector ys = val.y.values().transpose() * model.v_matrix.col(0);
        score = std::abs(pearson(xs, ys));
      } else {
        score = sum_correlations(model, val.x, val.y);
      }
      outcomes[i].score = score;
      models[i] = std::move(model);
    } catch (const Error& e) {
      outcomes[i].error = e.what();
    }
  };
  if (parallel) {
    parallel_for(pts.size(), evaluate);
  } else {
    for (std::size_t i = 0; i < pts.size(); ++i) evaluate(i);
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    if (outcomes[i].score && (!best || *outcomes[i].score > *outcomes[*best].score)) best = i;
  if (!best) {
    std::string msg = std::to_string(pts.size()) + " candidates failed";
    if (!outcomes.empty()) msg += "; first error: " + outcomes.front().error;
    throw AllCandidatesFailed(msg);
  }
  GridResult result;
  result.best = pts[*best];
  result.best_score = *outcomes[*best].score;
  result.best_model = std::move(*models[*best]);
  result.candidates = std::move(outcomes);
  return result;
}

// ------------------------------------------------------- simulation benchmark

enum class BenchMethod { scca, gcca, gcca_prior };

inline std::string method_name(BenchMethod m) {
  switch (m) {
    case BenchMethod::scca: return "1-SCCA";
    case BenchMethod::gcca: return "1-GCCA";
    case BenchMethod::gcca_prior: return "1-GCCA-Prior";
  }
  return "?";
}

/// Eight (l, σ) benchmark settings, n = 1000, p = q = 100.
inline std::vector<SimConfig> default_settings(std::uint64_t seed) {
  std::vector<SimConfig> out;
  for (int l : {5, 10, 25, 50})
    for (double sigma : {0.5, 0.75}) {
      SimConfig c;
      c.l = l;
      c.sigma = sigma;
      c.seed = seed;
      out.push_back(c);
    }
  return out;
}

inline std::string setting_label(const SimConfig& c) {
  return "l" + std::to_string(c.l) + "_sigma" + format_double(c.sigma);
}

struct BenchConfig {
  std::vector<SimConfig> settings;
  int repetitions = 25;
  std::vector<BenchMethod> methods{BenchMethod::scca, BenchMethod::gcca, BenchMethod::gcca_prior};
  std::optional<GridSpec> grid;  // default grid per setting when empty
  std::array<double, 3> fractions{0.5, 0.1, 0.4};
};

struct ExperimentResult {
  std::vector<EvalRecord> records;     // raw per (setting, repetition, method) metrics
  std::vector<EvalRecord> aggregates;  // means / standard deviations
  std::vector<std::string> failures;   // cells that could not be evaluated
};

inline constexpr std::array<const char*, 4> kBenchMetrics{"d_cos_u", "d_cos_v", "rho_error", "spectral_ratio"};

/// Pooled (all records), per-setting, and setting-averaged means and
/// standard deviations for every (method, metric) present in `records`.
inline std::vector<EvalRecord> aggregate_records(const std::vector<EvalRecord>& records) {
  // Ordered maps keep output order independent of record order.
  std::map<std::pair<std::string, std::string>, std::vector<double>> pooled;
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> per_setting;
  std::vector<std::string> setting_order;
  for (const auto& r : records) {
    const std::string method = r.tag("method");
    const std::string setting = r.tag("setting");
    pooled[{method, r.name}].push_back(r.value);
    per_setting[{method, r.name, setting}].push_back(r.value);
  }
  std::vector<EvalRecord> out;
  for (const auto& [key, values] : pooled) {
    const auto s = summarize(values);
    const std::vector<std::pair<std::string, std::string>> ctx{
        {"method", key.first}, {"pooling", "pooled"}, {"count", std::to_string(s.count)}};
    out.push_back({"mean_" + key.second, s.mean, ctx});
    out.push_back({"sd_" + key.second, s.sd, ctx});
  }
  std::map<std::pair<std::string, std::string>, std::vector<double>> setting_means;
  for (const auto& [key, values] : per_setting) {
    const auto& [method, metric, setting] = key;
    const auto s = summarize(values);
    const std::vector<std::pair<std::string, std::string>> ctx{
        {"method", method}, {"pooling", "per_setting"}, {"setting", setting}, {"count", std::to_string(s.count)}};
    out.push_back({"mean_" + metric, s.mean, ctx});
    out.push_back({"sd_" + metric, s.sd, ctx});
    setting_means[{method, metric}].push_back(s.mean);
  }
  for (const auto& [key, means] : setting_means) {
    const auto s = summarize(means);
    const std::vector<std::pair<std::string, std::string>> ctx{
        {"method", key.first}, {"pooling", "setting_average"}, {"count", std::to_string(s.count)}};
    out.push_back({"mean_" + key.second, s.mean, ctx});
    out.push_back({"sd_" + key.second, s.sd, ctx});
  }
  return out;
}

/// Looks up an aggregate value; throws if absent.
inline double aggregate_value(const std::vector<EvalRecord>& aggregates, const std::string& name,
                              const std::string& method, const std::string& pooling = "pooled") {
  for (const auto& r : aggregates)
    if (r.name == name && r.tag("method") == method && r.tag("pooling") == pooling) return r.value;
  throw InvalidArgument("no aggregate " + name + " for " + method + " (" + pooling + ")");
}

namespace detail {

struct CellOutput {
  std::vector<EvalRecord> records;
  std::vector<std::string> failures;
};

inline CellOutput run_bench_cell(const SimConfig& base, int rep, const BenchConfig& config) {
  CellOutput out;
  SimConfig cfg = base;
  cfg.seed = base.seed + static_cast<std::uint64_t>(rep);
  const std::string setting = setting_label(cfg);
  const auto fail = [&](const std::string& method, const std::string& what) {
    out.failures.push_back("setting=" + setting + ";rep=" + std::to_string(rep) + ";method=" + method + ": " + what);
  };
  try {
    const SimInstance inst = generate(cfg);
    const DataSplit parts = split(inst.x, inst.y, config.fractions, cfg.seed);
    const auto sx = fit_preprocess(parts.train.x, PreprocessMode::center);
    const auto sy = fit_preprocess(parts.train.y, PreprocessMode::center);
    const auto prep = [&](const PairedData& d) {
      return PairedData{apply_preprocess(d.x, sx), apply_preprocess(d.y, sy)};
    };
    const PairedData train = prep(parts.train);
    const PairedData val = prep(parts.validation);
    const PairedData test = prep(parts.test);
    const GraphLaplacian l1_data = laplacian_from_data(train.x);
    const GraphLaplacian l2_data = laplacian_from_data(train.y);
    const GridSpec grid = config.grid.value_or(GridSpec::defaults(cfg.p, cfg.q));

    for (BenchMethod method : config.methods) {
      const std::string name = method_name(method);
      try {
        const SolverKind kind = method == BenchMethod::scca ? SolverKind::scca : SolverKind::gcca;
        const GraphLaplacian& l1 = method == BenchMethod::gcca_prior ? inst.l_true : l1_data;
        const GridResult gr = grid_search(train, val, l1, l2_data, grid, kind, false);
        const Vector u_hat = gr.best_model.u_matrix.col(0);
        const Vector v_hat = gr.best_model.v_matrix.col(0);
        const std::vector<std::pair<std::string, std::string>> ctx{
            {"setting", setting}, {"rep", std::to_string(rep)}, {"method", name}};
        out.records.push_back({"d_cos_u", cosine_distance_abs(inst.u_true, u_hat), ctx});
        out.records.push_back({"d_cos_v", cosine_distance_abs(inst.v_true, v_hat), ctx});
        out.records.push_back(
            {"rho_error", correlation_error(inst.u_true, inst.v_true, u_hat, v_hat, test.x, test.y), ctx});
        out.records.push_back(
            {"spectral_ratio", spectral_frequency_ratio(inst.u_true, u_hat / u_hat.norm(), inst.l_true), ctx});
      } catch (const Error& e) {
        fail(name, e.what());
      }
    }
  } catch (const Error& e) {
    fail("all", e.what());
  }
  return out;
}

}  // namespace detail

/// Generates each (setting, repetition) instance with seed setting.seed + rep,
/// splits it, centers with training statistics, grid-searches every method
/// on the validation block and scores the chosen model on the test block.
inline ExperimentResult run_simulation_benchmark(const BenchConfig& config) {
  if (config.repetitions < 0) throw InvalidArgument("repetitions must be nonnegative");
  const std::size_t reps = static_cast<std::size_t>(config.repetitions);
  const std::size_t cells = config.settings.size() * reps;
  std::vector<detail::CellOutput> outputs(cells);
  parallel_for(cells, [&](std::size_t c) {
    outputs[c] = detail::run_bench_cell(config.settings[c / reps], static_cast<int>(c % reps), config);
  });
  ExperimentResult result;
  for (auto& o : outputs) {
    result.records.insert(result.records.end(), o.records.begin(), o.records.end());
    result.failures.insert(result.failures.end(), o.failures.begin(), o.failures.end());
  }
  result.aggregates = aggregate_records(result.records);
  return result;
}

inline void write_experiment_csv(std::ostream& out, const ExperimentResult& result) {
  write_records_csv(out, result.records);
  write_records_csv(out, result.aggregates);
}

inline ExperimentResult run_simulation_benchmark(const BenchConfig& config, const std::string& output_path) {
  ExperimentResult result = run_simulation_benchmark(config);
  auto out = detail::open_output(output_path);
  write_experiment_csv(out, result);
  return result;
}

}  // namespace ccafuse
