#pragma once

// File formats.
//
//   matrix CSV   header "sample_id,<feature>,...", one sample per row
//   labels CSV   header "sample_id,label", labels in {0, 1}
//   edge TSV     "node_a<TAB>node_b<TAB>weight", no header, '#' comments
//   model JSON   fitted EmbeddingModel
//   records CSV  "name,value,key1=val1;key2=val2"
//
// Numbers are written in shortest round-trip form with '.' as separator.
// Fields are not quoted, so identifiers may not contain ',' or line breaks.

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ccafuse/cca.hpp"
#include "ccafuse/error.hpp"
#include "ccafuse/forest.hpp"
#include "ccafuse/graph.hpp"
#include "ccafuse/matrix.hpp"
#include "ccafuse/metrics.hpp"

namespace ccafuse {

inline std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_double(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError(where + ": cannot parse number '" + std::string(text) + "'");
  return value;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------- matrices

inline DataMatrix read_matrix_csv(std::istream& in, const std::string& source = "matrix") {
  std::string line;
  if (!detail::next_line(in, line)) throw ParseError(source + ": empty file");
  const auto header = detail::split_fields(line, ',');
  if (header.empty() || header[0] != "sample_id")
    throw ParseError(source + ": header must start with 'sample_id'");
  if (header.size() < 2) throw ParseError(source + ": no feature columns");
  std::vector<std::string> features(header.begin() + 1, header.end());

  std::vector<std::string> ids;
  std::vector<double> values;  // row-major samples x features
  std::size_t line_no = 1;
  while (detail::next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line, ',');
    if (fields.size() != header.size())
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    ids.emplace_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c)
      values.push_back(detail::parse_double(fields[c], source + ":" + std::to_string(line_no)));
  }
  if (ids.empty()) throw ParseError(source + ": no sample rows");
  const auto p = static_cast<Eigen::Index>(features.size());
  const auto n = static_cast<Eigen::Index>(ids.size());
  Matrix m(p, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < p; ++i) m(i, j) = values[static_cast<std::size_t>(j * p + i)];
  return DataMatrix(std::move(m), std::move(features), std::move(ids));
}

inline DataMatrix read_matrix_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_matrix_csv(in, path);
}

/// Writes samples as rows. `values` is features x samples.
inline void write_matrix_csv(std::ostream& out, const Matrix& values, const std::vector<std::string>& feature_names,
                             const std::vector<std::string>& sample_ids) {
  out << "sample_id";
  for (const auto& f : feature_names) out << ',' << f;
  out << '\n';
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    out << sample_ids[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < values.rows(); ++i) out << ',' << format_double(values(i, j));
    out << '\n';
  }
}

inline void write_matrix_csv(std::ostream& out, const DataMatrix& m) {
  write_matrix_csv(out, m.values(), m.feature_names(), m.sample_ids());
}

inline void write_matrix_csv(const std::string& path, const DataMatrix& m) {
  auto out = detail::open_output(path);
  write_matrix_csv(out, m);
}

// ---------------------------------------------------------------- labels

struct LabelTable {
  std::vector<std::string> sample_ids;
  std::vector<int> labels;

  /// Labels reordered to `order`; every id must be present.
  std::vector<int> aligned_to(const std::vector<std::string>& order) const {
    std::unordered_map<std::string, int> lookup;
    for (std::size_t i = 0; i < sample_ids.size(); ++i) lookup.emplace(sample_ids[i], labels[i]);
    std::vector<int> out;
    out.reserve(order.size());
    for (const auto& id : order) {
      const auto it = lookup.find(id);
      if (it == lookup.end()) throw SampleMismatch("no label for sample '" + id + "'");
      out.push_back(it->second);
    }
    return out;
  }
};

inline LabelTable read_labels_csv(std::istream& in, const std::string& source = "labels") {
  std::string line;
  if (!detail::next_line(in, line)) throw ParseError(source + ": empty file");
  const auto header = detail::split_fields(line, ',');
  if (header.size() != 2 || header[0] != "sample_id" || header[1] != "label")
    throw ParseError(source + ": header must be 'sample_id,label'");
  LabelTable table;
  std::size_t line_no = 1;
  while (detail::next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line, ',');
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() != 2) throw ParseError(where + ": expected 2 fields");
    if (fields[1] != "0" && fields[1] != "1") throw ParseError(where + ": label must be 0 or 1");
    table.sample_ids.emplace_back(fields[0]);
    table.labels.push_back(fields[1] == "1" ? 1 : 0);
  }
  return table;
}

inline LabelTable read_labels_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_labels_csv(in, path);
}

inline void write_labels_csv(std::ostream& out, const std::vector<std::string>& ids, const std::vector<int>& labels) {
  out << "sample_id,label\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ',' << labels[i] << '\n';
}

// ---------------------------------------------------------------- edges

inline EdgeList read_edge_tsv(std::istream& in, const std::string& source = "edges") {
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_line(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = detail::split_fields(line, '\t');
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() != 3) throw ParseError(where + ": expected 3 tab-separated fields");
    edges.push_back({std::string(fields[0]), std::string(fields[1]), detail::parse_double(fields[2], where)});
  }
  return EdgeList(std::move(edges));
}

inline EdgeList read_edge_tsv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_edge_tsv(in, path);
}

inline void write_edge_tsv(std::ostream& out, const EdgeList& edges) {
  for (const auto& e : edges.edges()) out << e.node_a << '\t' << e.node_b << '\t' << format_double(e.weight) << '\n';
}

/// Edge list of the positive off-diagonal weights of a Laplacian (upper triangle).
inline EdgeList laplacian_edges(const GraphLaplacian& l) {
  std::vector<Edge> edges;
  const Matrix& m = l.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != 0.0)
        edges.push_back({l.node_names()[static_cast<std::size_t>(i)], l.node_names()[static_cast<std::size_t>(j)],
                         -m(i, j)});
  return EdgeList(std::move(edges));
}

// ---------------------------------------------------------------- models

namespace detail {

inline nlohmann::json matrix_rows(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_rows(const nlohmann::json& rows, Eigen::Index expect_rows, Eigen::Index expect_cols,
                               const char* field) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != expect_rows)
    throw ParseError(std::string("model field '") + field + "' has the wrong number of rows");
  Matrix m(expect_rows, expect_cols);
  for (Eigen::Index i = 0; i < expect_rows; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != expect_cols)
      throw ParseError(std::string("model field '") + field + "' has a row of the wrong length");
    for (Eigen::Index j = 0; j < expect_cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

}  // namespace detail

inline nlohmann::json model_to_json(const EmbeddingModel& model) {
  nlohmann::json j;
  j["method"] = model.method == CcaMethod::kgcca ? "kgcca" : "kscca";
  j["k"] = model.k;
  if (model.method == CcaMethod::kgcca) {
    const auto& p = model.params;
    j["params"] = {{"alpha1", p.alpha1}, {"beta1", p.beta1},   {"lambda1", p.lambda1},
                   {"alpha2", p.alpha2}, {"beta2", p.beta2},   {"lambda2", p.lambda2},
                   {"epsilon_reweight", p.epsilon_reweight},   {"tol", p.tol},
                   {"max_iter", p.max_iter}};
  } else {
    const SccaParams s = model.scca.value_or(SccaParams{});
    j["params"] = {{"c1", s.c1}, {"d1", s.d1}, {"tol", s.tol}, {"max_iter", s.max_iter}};
  }
  j["feature_names_x"] = model.feature_names_x;
  j["feature_names_y"] = model.feature_names_y;
  j["per_component_rho"] = std::vector<double>(model.per_component_rho.data(),
                                               model.per_component_rho.data() + model.per_component_rho.size());
  j["u_matrix"] = detail::matrix_rows(model.u_matrix);
  j["v_matrix"] = detail::matrix_rows(model.v_matrix);
  return j;
}

inline EmbeddingModel model_from_json(const nlohmann::json& j) {
  try {
    EmbeddingModel model;
    const auto method = j.at("method").get<std::string>();
    if (method == "kgcca") {
      model.method = CcaMethod::kgcca;
      const auto& p = j.at("params");
      model.params.alpha1 = p.at("alpha1").get<double>();
      model.params.beta1 = p.at("beta1").get<double>();
      model.params.lambda1 = p.at("lambda1").get<double>();
      model.params.alpha2 = p.at("alpha2").get<double>();
      model.params.beta2 = p.at("beta2").get<double>();
      model.params.lambda2 = p.at("lambda2").get<double>();
      model.params.epsilon_reweight = p.at("epsilon_reweight").get<double>();
      model.params.tol = p.at("tol").get<double>();
      model.params.max_iter = p.at("max_iter").get<int>();
    } else if (method == "kscca") {
      model.method = CcaMethod::kscca;
      const auto& p = j.at("params");
      SccaParams s;
      s.c1 = p.at("c1").get<double>();
      s.d1 = p.at("d1").get<double>();
      s.tol = p.at("tol").get<double>();
      s.max_iter = p.at("max_iter").get<int>();
      model.scca = s;
    } else {
      throw ParseError("unknown model method '" + method + "'");
    }
    model.k = j.at("k").get<int>();
    if (model.k < 1) throw ParseError("model k must be positive");
    model.feature_names_x = j.at("feature_names_x").get<std::vector<std::string>>();
    model.feature_names_y = j.at("feature_names_y").get<std::vector<std::string>>();
    const auto rho = j.at("per_component_rho").get<std::vector<double>>();
    if (static_cast<int>(rho.size()) != model.k) throw ParseError("per_component_rho length differs from k");
    model.per_component_rho = Eigen::Map<const Vector>(rho.data(), static_cast<Eigen::Index>(rho.size()));
    model.u_matrix = detail::matrix_from_rows(j.at("u_matrix"), static_cast<Eigen::Index>(model.feature_names_x.size()),
                                              model.k, "u_matrix");
    model.v_matrix = detail::matrix_from_rows(j.at("v_matrix"), static_cast<Eigen::Index>(model.feature_names_y.size()),
                                              model.k, "v_matrix");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what());
  }
}

inline void write_model_json(const std::string& path, const EmbeddingModel& model) {
  auto out = detail::open_output(path);
  out << model_to_json(model).dump(2) << '\n';
}

inline EmbeddingModel read_model_json(const std::string& path) {
  auto in = detail::open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return model_from_json(j);
}

inline nlohmann::json forest_to_json(const ForestModel& model) {
  nlohmann::json j;
  j["n_features"] = model.n_features;
  j["config"] = {{"n_trees", model.config.n_trees},
                 {"max_depth", model.config.max_depth},
                 {"min_samples_split", model.config.min_samples_split},
                 {"features_per_split", model.config.features_per_split == FeatureSubset::sqrt ? "sqrt" : "all"},
                 {"seed", model.config.seed}};
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.prob0, n.prob1});
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j;
}

inline ForestModel forest_from_json(const nlohmann::json& j) {
  try {
    ForestModel model;
    model.n_features = j.at("n_features").get<int>();
    const auto& c = j.at("config");
    model.config.n_trees = c.at("n_trees").get<int>();
    model.config.max_depth = c.at("max_depth").get<int>();
    model.config.min_samples_split = c.at("min_samples_split").get<int>();
    model.config.features_per_split = c.at("features_per_split").get<std::string>() == "all" ? FeatureSubset::all
                                                                                              : FeatureSubset::sqrt;
    model.config.seed = c.at("seed").get<std::uint64_t>();
    for (const auto& nodes : j.at("trees")) {
      DecisionTree tree;
      for (const auto& n : nodes)
        tree.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                              n.at(4).get<double>(), n.at(5).get<double>()});
      model.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed forest JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------- records

inline void write_record(std::ostream& out, const EvalRecord& r) {
  out << r.name << ',' << format_double(r.value) << ',';
  for (std::size_t i = 0; i < r.context.size(); ++i) {
    if (i > 0) out << ';';
    out << r.context[i].first << '=' << r.context[i].second;
  }
  out << '\n';
}

inline void write_records_csv(std::ostream& out, const std::vector<EvalRecord>& records) {
  for (const auto& r : records) write_record(out, r);
}

inline std::vector<EvalRecord> read_records_csv(std::istream& in) {
  std::vector<EvalRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto first = line.find(',');
    const auto second = first == std::string::npos ? first : line.find(',', first + 1);
    if (second == std::string::npos) throw ParseError("records:" + std::to_string(line_no) + ": expected 3 fields");
    EvalRecord r;
    r.name = line.substr(0, first);
    r.value = detail::parse_double(std::string_view(line).substr(first + 1, second - first - 1),
                                   "records:" + std::to_string(line_no));
    const std::string_view ctx = std::string_view(line).substr(second + 1);
    if (!ctx.empty())
      for (auto kv : detail::split_fields(ctx, ';')) {
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) throw ParseError("records:" + std::to_string(line_no) + ": bad tag");
        r.context.emplace_back(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
      }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ccafuse
