#pragma once

#include "hpgcn/graph.hpp"
#include "hpgcn/types.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hpgcn {

// Declared statistics checked after load. Edge counts are per relation and
// accepted under either the stored-entry or the undirected counting
// convention, each with a slack of n_nodes for dropped self-loops and merged
// duplicates.
struct ExpectedStats {
  std::optional<Index> nodes;
  std::optional<Index> features;
  std::optional<Index> isolated_count;
  std::optional<Scalar> neg_per_pos;  // the "5.9" of a 1:5.9 ratio
  std::map<std::string, Index> relation_edges;
};

// On-disk dataset description. File paths are resolved against the manifest's
// own directory. Formats:
//   edges:    one "u<TAB>v" or "u<TAB>v<TAB>w" line per edge, 0-indexed
//   features: "csv" (one row of comma-separated values per node) or
//             "f64-binary" (u32 rows, u32 cols, then row-major f64)
//   labels:   "node,label" lines with label in {0,1}; absent nodes unknown
struct DatasetManifest {
  std::string name;
  Index n_nodes = 0;
  std::filesystem::path feature_file;
  std::string feature_format = "csv";
  std::filesystem::path label_file;
  std::vector<std::pair<std::string, std::filesystem::path>> relations;
  std::optional<ExpectedStats> expected;

  static DatasetManifest from_json_file(const std::filesystem::path& path);
  void to_json_file(const std::filesystem::path& path) const;
};

// Builds the graph and validates expected stats; failures raise IngestError
// naming both the declared and the observed number.
AttributedGraph load_dataset(const DatasetManifest& manifest);

// Planted-anomaly generator. Connected nodes form a two-block homophilous
// random graph (normal/anomaly blocks, p_in within a block, p_out across);
// an isolated_fraction of nodes get no edges anywhere; features are
// N(0, sigma^2) per dimension with anomaly rows mean-shifted by
// feature_shift. Counts are floors of the fractions, and the remainder of
// the anomaly budget goes to the connected side.
struct SyntheticSpec {
  Index n_nodes = 2000;
  Index n_features = 16;
  Index n_relations = 1;
  Scalar anomaly_fraction = 0.05;
  Scalar isolated_fraction = 0.3;
  // fraction of anomalies placed among isolated nodes
  Scalar isolated_anomaly_fraction = 0.3;
  Scalar p_in = 0.01;
  Scalar p_out = 0.002;
  Scalar feature_shift = 1.5;
  Scalar noise_sigma = 1.0;
  std::uint64_t seed = 11;

  void validate() const;
};

struct SyntheticDataset {
  AttributedGraph graph;
  std::vector<Index> isolated_nodes;  // sorted
  std::vector<Index> anomaly_nodes;   // sorted
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

struct DatasetStats {
  Index nodes = 0;
  Index feature_dim = 0;
  std::vector<std::pair<std::string, Index>> relation_edges;  // undirected
  Index union_edges = 0;                                      // undirected
  Index labeled = 0;
  Index positives = 0;
  Index negatives = 0;
  Scalar neg_per_pos = 0.0;
  Index isolated_count = 0;  // degree-0 nodes in the union graph
};

DatasetStats dataset_stats(const AttributedGraph& g);

// Writes manifest + edge/feature/label files for a generated dataset so it
// flows through the same ingest path as real data. Returns the manifest path.
std::filesystem::path write_synthetic_dataset(const SyntheticSpec& spec,
                                              const std::filesystem::path& dir);

}  // namespace hpgcn
