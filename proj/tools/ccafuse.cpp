// ccafuse command-line driver.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ccafuse/ccafuse.hpp"
#include "json_config.hpp"

namespace {

using namespace ccafuse;

const std::map<std::string, CcaMethod> kMethods{{"gcca", CcaMethod::kgcca}, {"scca", CcaMethod::kscca}};
const std::map<std::string, PreprocessMode> kPreprocess{
    {"none", PreprocessMode::none}, {"center", PreprocessMode::center}, {"zscore", PreprocessMode::zscore}};
const std::map<std::string, DeflationMode> kDeflation{{"projective", DeflationMode::projective},
                                                      {"literal", DeflationMode::literal}};
const std::map<std::string, BenchMethod> kBenchMethods{
    {"scca", BenchMethod::scca}, {"gcca", BenchMethod::gcca}, {"gcca-prior", BenchMethod::gcca_prior}};
const std::map<std::string, SelectionMetric> kSelection{{"validation_rho", SelectionMetric::validation_rho},
                                                        {"validation_sum_rho", SelectionMetric::validation_sum_rho}};
const std::map<std::string, FoldMode> kFoldModes{{"kfold", FoldMode::kfold}, {"fixed", FoldMode::fixed}};
const std::map<std::string, FeatureSubset> kFeatureSubsets{{"sqrt", FeatureSubset::sqrt}, {"all", FeatureSubset::all}};

// Embedding options shared by fit and predict.
struct EmbedOptions {
  CcaMethod method = CcaMethod::kgcca;
  int k = 1;
  double alpha = 1.0, beta = 0.1, lambda = 1.0;
  double alpha1 = 0, beta1 = 0, lambda1 = 0, alpha2 = 0, beta2 = 0, lambda2 = 0;
  CLI::Option *o_alpha1 = nullptr, *o_beta1 = nullptr, *o_lambda1 = nullptr;
  CLI::Option *o_alpha2 = nullptr, *o_beta2 = nullptr, *o_lambda2 = nullptr;
  double c1 = 1.0, d1 = 1.0;
  double epsilon = 1e-6, tol = 1e-6;
  int max_iter = 500;
  bool raw_iterates = false;
  DeflationMode deflation = DeflationMode::projective;
  PreprocessMode preprocess = PreprocessMode::center;
  double graph_min_weight = 0.0;
  std::string edges;

  void add(CLI::App* app) {
    app->add_option("--method", method, "gcca or scca")->transform(CLI::CheckedTransformer(kMethods));
    app->add_option("--k", k, "number of canonical components")->capture_default_str();
    app->add_option("--alpha", alpha, "alpha for both modalities")->capture_default_str();
    app->add_option("--beta", beta, "beta for both modalities")->capture_default_str();
    app->add_option("--lambda", lambda, "lambda for both modalities")->capture_default_str();
    o_alpha1 = app->add_option("--alpha1", alpha1);
    o_beta1 = app->add_option("--beta1", beta1);
    o_lambda1 = app->add_option("--lambda1", lambda1);
    o_alpha2 = app->add_option("--alpha2", alpha2);
    o_beta2 = app->add_option("--beta2", beta2);
    o_lambda2 = app->add_option("--lambda2", lambda2);
    app->add_option("--c1", c1, "SCCA l1 bound on u")->capture_default_str();
    app->add_option("--d1", d1, "SCCA l1 bound on v")->capture_default_str();
    app->add_option("--epsilon", epsilon, "reweighting epsilon")->capture_default_str();
    app->add_option("--tol", tol, "convergence tolerance")->capture_default_str();
    app->add_option("--max-iter", max_iter)->capture_default_str();
    app->add_flag("--raw-iterates", raw_iterates, "do not rescale iterates between updates");
    app->add_option("--deflation", deflation)->transform(CLI::CheckedTransformer(kDeflation));
    app->add_option("--preprocess", preprocess)->transform(CLI::CheckedTransformer(kPreprocess));
    app->add_option("--graph-min-weight", graph_min_weight, "drop data-graph edges below this weight");
    app->add_option("--edges", edges, "prior edge list (TSV) over X's features");
  }

  GccaParams gcca() const {
    GccaParams g = GccaParams::symmetric(alpha, beta, lambda);
    const auto pick = [](CLI::Option* o, double v, double& dst) {
      if (o->count() > 0) dst = v;
    };
    pick(o_alpha1, alpha1, g.alpha1);
    pick(o_beta1, beta1, g.beta1);
    pick(o_lambda1, lambda1, g.lambda1);
    pick(o_alpha2, alpha2, g.alpha2);
    pick(o_beta2, beta2, g.beta2);
    pick(o_lambda2, lambda2, g.lambda2);
    g.epsilon_reweight = epsilon;
    g.tol = tol;
    g.max_iter = max_iter;
    g.normalize_iterates = !raw_iterates;
    return g;
  }

  SccaParams scca() const {
    SccaParams s;
    s.c1 = c1;
    s.d1 = d1;
    s.tol = tol;
    s.max_iter = max_iter;
    return s;
  }

  std::optional<GraphLaplacian> prior(const DataMatrix& x) const {
    if (edges.empty()) return std::nullopt;
    auto built = laplacian_from_edges(read_edge_tsv(edges), x.feature_names());
    if (built.skipped_edges > 0)
      std::cerr << "note: " << built.skipped_edges << " edges reference unknown features and were skipped\n";
    return std::move(built.laplacian);
  }
};

// ----------------------------------------------------------------- simulate

struct SimulateCmd {
  SimConfig config;
  std::string out_dir;

  void add(CLI::App* app) {
    app->add_option("--n", config.n, "samples")->capture_default_str();
    app->add_option("--p", config.p, "X features")->capture_default_str();
    app->add_option("--q", config.q, "Y features")->capture_default_str();
    app->add_option("--l", config.l, "low-frequency eigenvectors in u")->capture_default_str();
    app->add_option("--sigma", config.sigma, "noise level")->capture_default_str();
    app->add_option("--seed", config.seed)->capture_default_str();
    app->add_option("--out-dir", out_dir, "output directory")->required();
  }

  int run() const {
    const SimInstance inst = generate(config);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_matrix_csv((dir / "x.csv").string(), inst.x);
    write_matrix_csv((dir / "y.csv").string(), inst.y);
    std::vector<int> labels(static_cast<std::size_t>(config.n));
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = inst.weights(static_cast<Eigen::Index>(i)) > 0.0 ? 1 : 0;
    {
      auto out = detail::open_output((dir / "labels.csv").string());
      write_labels_csv(out, inst.x.sample_ids(), labels);
    }
    {
      auto out = detail::open_output((dir / "graph_x.tsv").string());
      write_edge_tsv(out, laplacian_edges(inst.l_true));
    }
    nlohmann::json truth;
    truth["n"] = config.n;
    truth["p"] = config.p;
    truth["q"] = config.q;
    truth["l"] = config.l;
    truth["sigma"] = config.sigma;
    truth["seed"] = config.seed;
    truth["u_true"] = std::vector<double>(inst.u_true.data(), inst.u_true.data() + inst.u_true.size());
    truth["v_true"] = std::vector<double>(inst.v_true.data(), inst.v_true.data() + inst.v_true.size());
    truth["weights"] = std::vector<double>(inst.weights.data(), inst.weights.data() + inst.weights.size());
    auto out = detail::open_output((dir / "truth.json").string());
    out << truth.dump(2) << '\n';
    std::cout << "wrote " << config.n << " samples (" << config.p << " x " << config.q << " features) to "
              << out_dir << '\n';
    return 0;
  }
};

// -------------------------------------------------------------------- bench

struct BenchCmd {
  std::string settings = "default";
  int reps = 25;
  std::uint64_t seed = 0;
  int n = 1000, p = 100, q = 100;
  std::vector<BenchMethod> methods{BenchMethod::scca, BenchMethod::gcca, BenchMethod::gcca_prior};
  std::vector<double> alpha, beta, lambda, c1, d1;
  bool asymmetric = false;
  SelectionMetric selection = SelectionMetric::validation_rho;
  int components = 1;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--settings", settings, "'default' or a comma list of l:sigma pairs")->capture_default_str();
    app->add_option("--reps", reps, "repetitions per setting")->capture_default_str();
    app->add_option("--seed", seed, "base seed; repetition r uses seed + r")->capture_default_str();
    app->add_option("--n", n)->capture_default_str();
    app->add_option("--p", p)->capture_default_str();
    app->add_option("--q", q)->capture_default_str();
    app->add_option("--methods", methods, "scca, gcca, gcca-prior")
        ->transform(CLI::CheckedTransformer(kBenchMethods))
        ->delimiter(',');
    app->add_option("--alpha", alpha, "alpha candidates")->delimiter(',');
    app->add_option("--beta", beta, "beta candidates")->delimiter(',');
    app->add_option("--lambda", lambda, "lambda candidates")->delimiter(',');
    app->add_option("--c1", c1, "SCCA c1 candidates")->delimiter(',');
    app->add_option("--d1", d1, "SCCA d1 candidates")->delimiter(',');
    app->add_flag("--asymmetric", asymmetric, "search each modality's weights independently");
    app->add_option("--selection", selection)->transform(CLI::CheckedTransformer(kSelection));
    app->add_option("--components", components, "components scored by validation_sum_rho")->capture_default_str();
    app->add_option("--out", out, "results CSV")->required();
  }

  std::vector<SimConfig> parse_settings() const {
    std::vector<SimConfig> list;
    if (settings == "default") {
      list = default_settings(seed);
    } else {
      std::stringstream ss(settings);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw CLI::ValidationError("--settings", "expected l:sigma, got '" + item + "'");
        SimConfig c;
        try {
          c.l = std::stoi(item.substr(0, colon));
          c.sigma = std::stod(item.substr(colon + 1));
        } catch (const std::exception&) {
          throw CLI::ValidationError("--settings", "cannot parse '" + item + "'");
        }
        c.seed = seed;
        list.push_back(c);
      }
    }
    for (auto& c : list) {
      c.n = n;
      c.p = p;
      c.q = q;
      c.validate();
    }
    return list;
  }

  int run() const {
    BenchConfig config;
    config.settings = parse_settings();
    config.repetitions = reps;
    config.methods = methods;
    GridSpec grid = GridSpec::defaults(p, q);
    if (!alpha.empty()) grid.alpha1 = grid.alpha2 = alpha;
    if (!beta.empty()) grid.beta1 = grid.beta2 = beta;
    if (!lambda.empty()) grid.lambda1 = grid.lambda2 = lambda;
    if (!c1.empty()) grid.c1 = c1;
    if (!d1.empty()) grid.d1 = d1;
    grid.symmetric = !asymmetric;
    grid.selection_metric = selection;
    grid.components = components;
    config.grid = grid;

    const ExperimentResult result = run_simulation_benchmark(config, out);
    for (const auto& f : result.failures) std::cerr << "failed: " << f << '\n';
    std::cout << std::left << std::setw(14) << "method";
    for (const char* m : kBenchMetrics) std::cout << std::setw(24) << m;
    std::cout << '\n';
    for (BenchMethod m : methods) {
      const std::string name = method_name(m);
      std::cout << std::setw(14) << name;
      for (const char* metric : kBenchMetrics) {
        std::string cell = "-";
        try {
          const double mean = aggregate_value(result.aggregates, std::string("mean_") + metric, name);
          const double sd = aggregate_value(result.aggregates, std::string("sd_") + metric, name);
          std::ostringstream os;
          os << std::fixed << std::setprecision(4) << mean << " +- " << sd;
          cell = os.str();
        } catch (const Error&) {
        }
        std::cout << std::setw(24) << cell;
      }
      std::cout << '\n';
    }
    std::cout << result.records.size() << " records written to " << out << '\n';
    return 0;
  }
};

// ---------------------------------------------------------------------- fit

struct FitCmd {
  EmbedOptions embed;
  std::string x_path, y_path, out;

  void add(CLI::App* app) {
    app->add_option("--x", x_path, "X matrix CSV")->required();
    app->add_option("--y", y_path, "Y matrix CSV")->required();
    embed.add(app);
    app->add_option("--out", out, "model JSON")->required();
  }

  int run() const {
    const DataMatrix x_raw = read_matrix_csv(x_path);
    const DataMatrix y_raw = read_matrix_csv(y_path);
    require_same_samples(x_raw, y_raw);
    const DataMatrix x = preprocess(x_raw, embed.preprocess);
    const DataMatrix y = preprocess(y_raw, embed.preprocess);
    EmbeddingModel model;
    if (embed.method == CcaMethod::kscca) {
      model = fit_kscca(x, y, embed.k, embed.scca(), embed.deflation);
    } else {
      const auto prior = embed.prior(x);
      const GraphLaplacian l1 = prior ? *prior : laplacian_from_data(x, embed.graph_min_weight);
      const GraphLaplacian l2 = laplacian_from_data(y, embed.graph_min_weight);
      model = fit_kgcca(x, y, l1, l2, embed.k, embed.gcca(), embed.deflation);
    }
    write_model_json(out, model);
    std::cout << "component correlations:";
    for (Eigen::Index j = 0; j < model.per_component_rho.size(); ++j) std::cout << ' ' << model.per_component_rho(j);
    std::cout << '\n';
    return 0;
  }
};

// ---------------------------------------------------------------- transform

struct TransformCmd {
  std::string model_path, x_path, y_path, out;
  PreprocessMode preprocess_mode = PreprocessMode::center;

  void add(CLI::App* app) {
    app->add_option("--model", model_path, "model JSON")->required();
    app->add_option("--x", x_path, "X matrix CSV")->required();
    app->add_option("--y", y_path, "Y matrix CSV")->required();
    app->add_option("--preprocess", preprocess_mode, "applied to the given data before projecting")
        ->transform(CLI::CheckedTransformer(kPreprocess));
    app->add_option("--out", out, "embedding CSV (samples x 2K)")->required();
  }

  int run() const {
    const EmbeddingModel model = read_model_json(model_path);
    const DataMatrix x = preprocess(read_matrix_csv(x_path), preprocess_mode);
    const DataMatrix y = preprocess(read_matrix_csv(y_path), preprocess_mode);
    const FusedEmbedding z = transform(model, x, y);
    std::vector<std::string> names;
    for (int j = 0; j < model.k; ++j) names.push_back("zx" + std::to_string(j + 1));
    for (int j = 0; j < model.k; ++j) names.push_back("zy" + std::to_string(j + 1));
    auto os = detail::open_output(out);
    write_matrix_csv(os, z.fused, names, z.sample_ids);
    return 0;
  }
};

// ------------------------------------------------------------------ predict

struct PredictCmd {
  EmbedOptions embed;
  FusionConfig config;
  std::string x_path, y_path, labels_path, out, predictions;

  void add(CLI::App* app) {
    embed.k = 100;
    app->add_option("--x", x_path, "X matrix CSV")->required();
    app->add_option("--y", y_path, "Y matrix CSV")->required();
    app->add_option("--labels", labels_path, "labels CSV")->required();
    embed.add(app);
    app->add_option("--fold-mode", config.fold_mode)->transform(CLI::CheckedTransformer(kFoldModes));
    app->add_option("--folds", config.folds)->capture_default_str();
    app->add_option("--test-fraction", config.test_fraction, "held-out share in fixed mode")->capture_default_str();
    app->add_option("--seed", config.seed, "fold assignment seed")->capture_default_str();
    app->add_option("--trees", config.forest.n_trees)->capture_default_str();
    app->add_option("--max-depth", config.forest.max_depth)->capture_default_str();
    app->add_option("--min-samples-split", config.forest.min_samples_split)->capture_default_str();
    app->add_option("--features", config.forest.features_per_split, "sqrt or all")
        ->transform(CLI::CheckedTransformer(kFeatureSubsets));
    app->add_option("--forest-seed", config.forest.seed)->capture_default_str();
    app->add_flag("--baselines", config.baselines, "also run x_only, y_only, early and late fusion");
    app->add_option("--out", out, "metrics CSV");
    app->add_option("--predictions", predictions, "out-of-fold predictions CSV");
  }

  int run() {
    config.method = embed.method;
    config.k = embed.k;
    config.gcca = embed.gcca();
    config.scca = embed.scca();
    config.deflation = embed.deflation;
    config.preprocess = embed.preprocess;
    config.graph_min_weight = embed.graph_min_weight;
    std::optional<std::string> edge_path;
    if (!embed.edges.empty()) edge_path = embed.edges;
    const FusionResult result = run_fusion_pipeline(x_path, y_path, labels_path, edge_path, config);

    std::cout << std::left << std::setw(16) << "method" << std::setw(12) << "accuracy" << std::setw(12)
              << "weighted_f1" << "weighted_auc\n";
    for (const auto& m : result.methods) {
      std::cout << std::setw(16) << m.method;
      for (const char* metric : {"accuracy", "weighted_f1", "weighted_auc"}) {
        std::string cell = "-";
        for (const auto& r : result.records)
          if (r.name == metric && r.tag("method") == m.method && r.tag("fold") == "pooled") {
            std::ostringstream os;
            os << std::fixed << std::setprecision(4) << r.value;
            cell = os.str();
          }
        std::cout << std::setw(12) << cell;
      }
      std::cout << '\n';
    }
    if (!out.empty()) {
      auto os = detail::open_output(out);
      write_records_csv(os, result.records);
    }
    if (!predictions.empty()) {
      auto os = detail::open_output(predictions);
      os << "sample_id,label";
      for (const auto& m : result.methods) os << ',' << m.method << "_label," << m.method << "_score";
      os << '\n';
      for (std::size_t i = 0; i < result.sample_ids.size(); ++i) {
        os << result.sample_ids[i] << ',' << result.true_labels[i];
        for (const auto& m : result.methods) os << ',' << m.labels[i] << ',' << format_double(m.scores[i]);
        os << '\n';
      }
    }
    return 0;
  }
};

// ----------------------------------------------------------- validate-graph

struct ValidateGraphCmd {
  std::string edges, data, nodes;
  double min_weight = 0.0;

  void add(CLI::App* app) {
    auto* e = app->add_option("--edges", edges, "edge list TSV");
    auto* d = app->add_option("--data", data, "build the squared-correlation graph of this matrix CSV");
    e->excludes(d);
    app->add_option("--nodes", nodes, "matrix CSV whose feature names fix the node order (with --edges)")->needs(e);
    app->add_option("--min-weight", min_weight, "with --data: drop weaker edges")->needs(d);
  }

  int run() const {
    GraphLaplacian l = GraphLaplacian::zero({});
    if (!data.empty()) {
      l = laplacian_from_data(read_matrix_csv(data), min_weight);
    } else if (!edges.empty()) {
      const EdgeList list = read_edge_tsv(edges);
      std::vector<std::string> names;
      if (!nodes.empty()) {
        names = read_matrix_csv(nodes).feature_names();
      } else {
        std::map<std::string, bool> seen;
        for (const auto& edge : list.edges())
          for (const auto* name : {&edge.node_a, &edge.node_b})
            if (!seen[*name]) {
              seen[*name] = true;
              names.push_back(*name);
            }
      }
      l = laplacian_from_edges(list, names).laplacian;
    } else {
      throw CLI::RequiredError("--edges or --data");
    }
    const ValidationReport report = validate_laplacian(l);
    std::cout << l.size() << " nodes\n";
    for (const auto& c : report.checks)
      std::cout << std::left << std::setw(26) << c.name << (c.passed ? "pass" : "FAIL") << "  measured "
                << c.measured << "  threshold " << c.threshold << '\n';
    if (report.all_passed()) return 0;
    std::cerr << "Laplacian validation failed\n";
    return 3;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-regularized CCA fusion toolkit"};
  app.config_formatter(std::make_shared<ccafuse::cli::JsonConfig>());
  app.set_config("--config", "", "JSON file mirroring the command-line flags");
  app.require_subcommand(1);

  SimulateCmd simulate;
  BenchCmd bench;
  FitCmd fit;
  TransformCmd transform_cmd;
  PredictCmd predict;
  ValidateGraphCmd validate_graph;
  auto* s_sim = app.add_subcommand("simulate", "write a synthetic instance");
  auto* s_bench = app.add_subcommand("bench", "run the simulation benchmark");
  auto* s_fit = app.add_subcommand("fit", "fit an embedding model");
  auto* s_transform = app.add_subcommand("transform", "project data with a fitted model");
  auto* s_predict = app.add_subcommand("predict", "cross-validated fusion classification");
  auto* s_validate = app.add_subcommand("validate-graph", "check a graph Laplacian");
  simulate.add(s_sim);
  bench.add(s_bench);
  fit.add(s_fit);
  transform_cmd.add(s_transform);
  predict.add(s_predict);
  validate_graph.add(s_validate);

  try {
    app.parse(argc, argv);
    if (*s_sim) return simulate.run();
    if (*s_bench) return bench.run();
    if (*s_fit) return fit.run();
    if (*s_transform) return transform_cmd.run();
    if (*s_predict) return predict.run();
    if (*s_validate) return validate_graph.run();
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const ccafuse::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.category() == ccafuse::ErrorCategory::data ? 2 : 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
