#include "hpgcn/data_io.hpp"

#include "hpgcn/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hpgcn {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& rel) {
  std::filesystem::path p(rel);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

DatasetManifest DatasetManifest::from_json_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open manifest " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IngestError("manifest parse error: " + std::string(e.what()));
  }
  const auto base = path.parent_path();
  DatasetManifest m;
  try {
    m.name = doc.at("name").get<std::string>();
    m.n_nodes = doc.at("n_nodes").get<Index>();
    const auto& feat = doc.at("features");
    m.feature_file = resolve(base, feat.at("path").get<std::string>());
    m.feature_format = feat.value("format", "csv");
    m.label_file = resolve(base, doc.at("labels").get<std::string>());
    for (const auto& rel : doc.at("relations")) {
      m.relations.emplace_back(
          rel.at("name").get<std::string>(),
          resolve(base, rel.at("edges").get<std::string>()));
    }
    if (doc.contains("expected_stats")) {
      const auto& ex = doc.at("expected_stats");
      ExpectedStats stats;
      if (ex.contains("nodes")) stats.nodes = ex.at("nodes").get<Index>();
      if (ex.contains("features"))
        stats.features = ex.at("features").get<Index>();
      if (ex.contains("isolated_count"))
        stats.isolated_count = ex.at("isolated_count").get<Index>();
      if (ex.contains("neg_per_pos"))
        stats.neg_per_pos = ex.at("neg_per_pos").get<Scalar>();
      if (ex.contains("relation_edges")) {
        for (const auto& [k, v] : ex.at("relation_edges").items())
          stats.relation_edges[k] = v.get<Index>();
      }
      m.expected = std::move(stats);
    }
  } catch (const json::exception& e) {
    throw IngestError("manifest field error: " + std::string(e.what()));
  }
  if (m.feature_format != "csv" && m.feature_format != "f64-binary")
    throw IngestError("unknown feature format: " + m.feature_format);
  if (m.relations.empty())
    throw IngestError("manifest declares no relations");
  return m;
}

void DatasetManifest::to_json_file(const std::filesystem::path& path) const {
  json doc;
  doc["name"] = name;
  doc["n_nodes"] = n_nodes;
  doc["features"] = {{"path", feature_file.filename().string()},
                     {"format", feature_format}};
  doc["labels"] = label_file.filename().string();
  doc["relations"] = json::array();
  for (const auto& [rel_name, rel_path] : relations) {
    doc["relations"].push_back(
        {{"name", rel_name}, {"edges", rel_path.filename().string()}});
  }
  if (expected) {
    json ex;
    if (expected->nodes) ex["nodes"] = *expected->nodes;
    if (expected->features) ex["features"] = *expected->features;
    if (expected->isolated_count)
      ex["isolated_count"] = *expected->isolated_count;
    if (expected->neg_per_pos) ex["neg_per_pos"] = *expected->neg_per_pos;
    if (!expected->relation_edges.empty()) {
      json re;
      for (const auto& [k, v] : expected->relation_edges) re[k] = v;
      ex["relation_edges"] = std::move(re);
    }
    doc["expected_stats"] = std::move(ex);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

namespace {

std::vector<Edge> read_edge_file(const std::filesystem::path& path,
                                 Index n_nodes) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open edge file " + path.string());
  std::vector<Edge> edges;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Edge e;
    if (!(ls >> e.u >> e.v))
      throw IngestError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'u<TAB>v'");
    if (!(ls >> e.w)) e.w = 1.0;
    if (e.u < 0 || e.u >= n_nodes || e.v < 0 || e.v >= n_nodes)
      throw IngestError(path.string() + ":" + std::to_string(line_no) +
                        ": node index out of range");
    edges.push_back(e);
  }
  return edges;
}

Matrix read_features_csv(const std::filesystem::path& path, Index n_nodes) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open feature file " + path.string());
  std::vector<std::vector<Scalar>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<Scalar> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IngestError(path.string() + ": bad value '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IngestError(path.string() + ": ragged feature rows");
    rows.push_back(std::move(row));
  }
  if (static_cast<Index>(rows.size()) != n_nodes)
    throw IngestError(path.string() + ": expected " +
                      std::to_string(n_nodes) + " feature rows, got " +
                      std::to_string(rows.size()));
  Matrix x(n_nodes, rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j)
      x(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return x;
}

Matrix read_features_binary(const std::filesystem::path& path, Index n_nodes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open feature file " + path.string());
  std::uint32_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!in) throw IngestError(path.string() + ": truncated header");
  if (static_cast<Index>(rows) != n_nodes)
    throw IngestError(path.string() + ": header declares " +
                      std::to_string(rows) + " rows, manifest says " +
                      std::to_string(n_nodes));
  Matrix x(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (!in) throw IngestError(path.string() + ": truncated data");
      x(i, j) = v;
    }
  }
  return x;
}

std::vector<int> read_labels(const std::filesystem::path& path,
                             Index n_nodes) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open label file " + path.string());
  std::vector<int> labels(static_cast<size_t>(n_nodes), kLabelUnknown);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Index node;
    int label;
    if (std::sscanf(line.c_str(), "%td,%d", &node, &label) != 2)
      throw IngestError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'node,label'");
    if (node < 0 || node >= n_nodes)
      throw IngestError(path.string() + ":" + std::to_string(line_no) +
                        ": node index out of range");
    if (label != 0 && label != 1)
      throw IngestError(path.string() + ":" + std::to_string(line_no) +
                        ": label must be 0 or 1");
    labels[static_cast<size_t>(node)] = label;
  }
  return labels;
}

void check_stat(const std::string& what, Index expected, Index got) {
  if (expected != got)
    throw IngestError(what + ": manifest declares " +
                      std::to_string(expected) + ", dataset has " +
                      std::to_string(got));
}

// Table-style edge counts may follow either the directed or the undirected
// convention; accept both, with n_nodes slack for stripped self-loops and
// merged duplicates.
void check_edge_count(const std::string& rel, Index expected,
                      Index undirected, Index n_nodes) {
  const Index stored = undirected * 2;
  const Index tol = n_nodes;
  if (std::abs(expected - undirected) <= tol) return;
  if (std::abs(expected - stored) <= tol) return;
  throw IngestError("relation " + rel + ": manifest declares " +
                    std::to_string(expected) + " edges, dataset has " +
                    std::to_string(undirected) + " undirected (" +
                    std::to_string(stored) + " stored entries)");
}

}  // namespace

AttributedGraph load_dataset(const DatasetManifest& manifest) {
  AttributedGraph g;
  g.features = manifest.feature_format == "csv"
                   ? read_features_csv(manifest.feature_file, manifest.n_nodes)
                   : read_features_binary(manifest.feature_file,
                                          manifest.n_nodes);
  g.labels = read_labels(manifest.label_file, manifest.n_nodes);
  for (const auto& [name, path] : manifest.relations) {
    const auto edges = read_edge_file(path, manifest.n_nodes);
    try {
      g.relations.emplace_back(name, build_adjacency(manifest.n_nodes, edges));
    } catch (const std::invalid_argument& e) {
      throw IngestError("relation " + name + ": " + e.what());
    }
  }
  g.validate();

  if (manifest.expected) {
    const ExpectedStats& ex = *manifest.expected;
    const DatasetStats stats = dataset_stats(g);
    if (ex.nodes) check_stat("node count", *ex.nodes, stats.nodes);
    if (ex.features) check_stat("feature dim", *ex.features, stats.feature_dim);
    if (ex.isolated_count)
      check_stat("isolated count", *ex.isolated_count, stats.isolated_count);
    if (ex.neg_per_pos) {
      const Scalar rel_err = std::abs(stats.neg_per_pos - *ex.neg_per_pos) /
                             std::max(1.0, std::abs(*ex.neg_per_pos));
      if (rel_err > 0.02)
        throw IngestError("pos:neg ratio: manifest declares 1:" +
                          std::to_string(*ex.neg_per_pos) + ", dataset has 1:" +
                          std::to_string(stats.neg_per_pos));
    }
    for (const auto& [rel, expected_edges] : ex.relation_edges) {
      const auto it = std::find_if(
          stats.relation_edges.begin(), stats.relation_edges.end(),
          [&](const auto& p) { return p.first == rel; });
      if (it == stats.relation_edges.end())
        throw IngestError("expected_stats names unknown relation " + rel);
      check_edge_count(rel, expected_edges, it->second, stats.nodes);
    }
  }
  return g;
}

void SyntheticSpec::validate() const {
  if (n_nodes < 1) throw std::invalid_argument("n_nodes must be >= 1");
  if (n_features < 1) throw std::invalid_argument("n_features must be >= 1");
  if (n_relations < 1) throw std::invalid_argument("n_relations must be >= 1");
  for (const auto [frac, name] :
       {std::pair{anomaly_fraction, "anomaly_fraction"},
        std::pair{isolated_fraction, "isolated_fraction"},
        std::pair{isolated_anomaly_fraction, "isolated_anomaly_fraction"}}) {
    if (!(frac >= 0.0 && frac <= 1.0))
      throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0))
    throw std::invalid_argument("edge probabilities must lie in [0, 1]");
  if (!(p_in > p_out))
    throw std::invalid_argument("p_in must exceed p_out");
  if (!(noise_sigma > 0.0))
    throw std::invalid_argument("noise_sigma must be > 0");
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const Index n = spec.n_nodes;
  const auto n_anomaly =
      static_cast<Index>(std::floor(spec.anomaly_fraction * static_cast<Scalar>(n)));
  const auto n_isolated =
      static_cast<Index>(std::floor(spec.isolated_fraction * static_cast<Scalar>(n)));
  const auto n_isolated_anomaly = static_cast<Index>(
      std::floor(spec.isolated_anomaly_fraction * static_cast<Scalar>(n_anomaly)));
  if (n_isolated_anomaly > n_isolated)
    throw std::invalid_argument(
        "more isolated anomalies requested than isolated nodes");
  const Index n_connected_anomaly = n_anomaly - n_isolated_anomaly;
  if (n_connected_anomaly > n - n_isolated)
    throw std::invalid_argument(
        "more connected anomalies requested than connected nodes");

  Rng rng(spec.seed);
  std::vector<Index> perm(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  rng.shuffle(perm);

  SyntheticDataset out;
  std::vector<int> labels(static_cast<size_t>(n), kLabelNormal);
  std::vector<bool> isolated(static_cast<size_t>(n), false);
  for (Index i = 0; i < n_isolated; ++i)
    isolated[static_cast<size_t>(perm[static_cast<size_t>(i)])] = true;
  for (Index i = 0; i < n_isolated_anomaly; ++i)
    labels[static_cast<size_t>(perm[static_cast<size_t>(i)])] = kLabelAnomaly;
  for (Index i = 0; i < n_connected_anomaly; ++i)
    labels[static_cast<size_t>(
        perm[static_cast<size_t>(n_isolated + i)])] = kLabelAnomaly;

  std::vector<Index> connected;
  for (Index v = 0; v < n; ++v) {
    if (isolated[static_cast<size_t>(v)]) {
      out.isolated_nodes.push_back(v);
    } else {
      connected.push_back(v);
    }
    if (labels[static_cast<size_t>(v)] == kLabelAnomaly)
      out.anomaly_nodes.push_back(v);
  }

  // Draw relation edges over connected nodes; redraw while any connected
  // node is left with union degree 0, then patch the stragglers so the
  // partition always matches the requested fractions.
  const Index n_conn = static_cast<Index>(connected.size());
  std::vector<std::vector<Edge>> relation_edges;
  for (int attempt = 0; attempt < 16; ++attempt) {
    relation_edges.assign(static_cast<size_t>(spec.n_relations), {});
    for (auto& edges : relation_edges) {
      for (Index a = 0; a < n_conn; ++a) {
        for (Index b = a + 1; b < n_conn; ++b) {
          const Index u = connected[static_cast<size_t>(a)];
          const Index v = connected[static_cast<size_t>(b)];
          const bool same = labels[static_cast<size_t>(u)] ==
                            labels[static_cast<size_t>(v)];
          if (rng.uniform() < (same ? spec.p_in : spec.p_out))
            edges.push_back({u, v, 1.0});
        }
      }
    }
    std::vector<bool> touched(static_cast<size_t>(n), false);
    for (const auto& edges : relation_edges) {
      for (const Edge& e : edges) {
        touched[static_cast<size_t>(e.u)] = true;
        touched[static_cast<size_t>(e.v)] = true;
      }
    }
    std::vector<Index> stragglers;
    for (const Index v : connected)
      if (!touched[static_cast<size_t>(v)]) stragglers.push_back(v);
    if (stragglers.empty()) break;
    if (attempt == 15 && n_conn >= 2) {
      for (const Index v : stragglers) {
        Index other = v;
        while (other == v)
          other = connected[static_cast<size_t>(rng.uniform_index(n_conn))];
        relation_edges[0].push_back({v, other, 1.0});
      }
    }
  }

  AttributedGraph& g = out.graph;
  for (Index r = 0; r < spec.n_relations; ++r) {
    g.relations.emplace_back(
        "rel" + std::to_string(r),
        build_adjacency(n, relation_edges[static_cast<size_t>(r)]));
  }
  g.features.resize(n, spec.n_features);
  for (Index v = 0; v < n; ++v) {
    const Scalar mean =
        labels[static_cast<size_t>(v)] == kLabelAnomaly ? spec.feature_shift : 0.0;
    for (Index j = 0; j < spec.n_features; ++j)
      g.features(v, j) = rng.normal(mean, spec.noise_sigma);
  }
  g.labels = std::move(labels);
  g.validate();
  return out;
}

DatasetStats dataset_stats(const AttributedGraph& g) {
  DatasetStats s;
  s.nodes = g.n_nodes();
  s.feature_dim = g.feature_dim();
  for (const auto& [name, adj] : g.relations)
    s.relation_edges.emplace_back(name, adj.n_edges());
  const SparseAdjacency u = union_relations(g);
  s.union_edges = u.n_edges();
  for (const int y : g.labels) {
    if (y == kLabelUnknown) continue;
    ++s.labeled;
    if (y == kLabelAnomaly) {
      ++s.positives;
    } else {
      ++s.negatives;
    }
  }
  s.neg_per_pos = s.positives > 0 ? static_cast<Scalar>(s.negatives) /
                                        static_cast<Scalar>(s.positives)
                                  : 0.0;
  const DegreeVector deg = degrees(u);
  for (Index i = 0; i < s.nodes; ++i)
    if (deg.d[i] == 0.0) ++s.isolated_count;
  return s;
}

std::filesystem::path write_synthetic_dataset(
    const SyntheticSpec& spec, const std::filesystem::path& dir) {
  const SyntheticDataset data = generate_synthetic(spec);
  std::filesystem::create_directories(dir);

  char buf[64];
  {
    std::ofstream out(dir / "features.csv", std::ios::trunc);
    for (Index i = 0; i < data.graph.features.rows(); ++i) {
      for (Index j = 0; j < data.graph.features.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", data.graph.features(i, j));
        out << (j ? "," : "") << buf;
      }
      out << "\n";
    }
  }
  {
    std::ofstream out(dir / "labels.csv", std::ios::trunc);
    for (size_t i = 0; i < data.graph.labels.size(); ++i)
      out << i << "," << data.graph.labels[i] << "\n";
  }
  DatasetManifest m;
  m.name = "synthetic-" + std::to_string(spec.seed);
  m.n_nodes = spec.n_nodes;
  m.feature_file = dir / "features.csv";
  m.feature_format = "csv";
  m.label_file = dir / "labels.csv";
  ExpectedStats ex;
  const DatasetStats stats = dataset_stats(data.graph);
  ex.nodes = stats.nodes;
  ex.features = stats.feature_dim;
  ex.isolated_count = stats.isolated_count;
  for (const auto& [name, adj] : data.graph.relations) {
    const auto file = dir / (name + ".tsv");
    std::ofstream out(file, std::ios::trunc);
    for (Index i = 0; i < adj.n_nodes(); ++i) {
      for (const Index j : adj.neighbors(i)) {
        if (i < j) out << i << "\t" << j << "\n";  // store each edge once
      }
    }
    m.relations.emplace_back(name, file);
    ex.relation_edges[name] = adj.n_edges();
  }
  m.expected = std::move(ex);
  const auto manifest_path = dir / "manifest.json";
  m.to_json_file(manifest_path);
  return manifest_path;
}

}  // namespace hpgcn
