#pragma once

#include "hpgcn/types.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hpgcn {

struct Edge {
  Index u = 0;
  Index v = 0;
  Scalar w = 1.0;
};

// Immutable symmetric CSR adjacency of one relation. No self-loops; column
// indices strictly increasing within each row; entry (i,j) present iff (j,i)
// is, with equal weight. Construct through build_adjacency unless the buffers
// already satisfy all of that.
class SparseAdjacency {
 public:
  SparseAdjacency() : row_offsets_{0} {}
  SparseAdjacency(Index n_nodes, std::vector<Index> row_offsets,
                  std::vector<Index> col_indices,
                  std::vector<Scalar> edge_weights);

  Index n_nodes() const { return n_; }
  Index nnz() const { return static_cast<Index>(col_indices_.size()); }
  // Stored entries / 2; the undirected edge count.
  Index n_edges() const { return nnz() / 2; }

  const std::vector<Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Index>& col_indices() const { return col_indices_; }
  const std::vector<Scalar>& edge_weights() const { return edge_weights_; }

  std::span<const Index> neighbors(Index i) const;
  std::span<const Scalar> weights(Index i) const;

  // Weight of (u,v), 0 when absent.
  Scalar weight(Index u, Index v) const;

 private:
  Index n_ = 0;
  std::vector<Index> row_offsets_;
  std::vector<Index> col_indices_;
  std::vector<Scalar> edge_weights_;

  void validate() const;
};

// Symmetrizes (each input edge inserted both directions), merges duplicates
// by summing weights, strips self-loops.
SparseAdjacency build_adjacency(Index n_nodes, std::span<const Edge> edges);

constexpr int kLabelNormal = 0;
constexpr int kLabelAnomaly = 1;
constexpr int kLabelUnknown = -1;

// Relations over one node set, node features, and partial binary labels.
struct AttributedGraph {
  std::vector<std::pair<std::string, SparseAdjacency>> relations;
  Matrix features;          // n_nodes x feature_dim
  std::vector<int> labels;  // kLabelNormal / kLabelAnomaly / kLabelUnknown

  Index n_nodes() const { return features.rows(); }
  Index feature_dim() const { return features.cols(); }
  const SparseAdjacency& relation(const std::string& name) const;
  void validate() const;
};

struct DegreeVector {
  Vector d;           // row sums
  Vector d_inv_sqrt;  // 1/sqrt(d), 0.0 where d == 0
};

DegreeVector degrees(const SparseAdjacency& adj);

// y = x - D^{-1/2} W D^{-1/2} x. Acts as the identity on zero-degree nodes.
Vector laplacian_matvec(const SparseAdjacency& adj, const DegreeVector& deg,
                        const Vector& x);

// Column-wise laplacian_matvec over an n x d signal matrix.
Matrix laplacian_propagate(const SparseAdjacency& adj, const DegreeVector& deg,
                           const Matrix& h);

// Presence union of all relations; resulting weights are all 1.0.
SparseAdjacency union_relations(const AttributedGraph& g);

struct ComponentLabeling {
  std::vector<Index> component_id;     // per node
  std::vector<Index> component_sizes;  // indexed by component id
  Index num_components() const {
    return static_cast<Index>(component_sizes.size());
  }
};

// Undirected connectivity; ids assigned in order of first-seen node.
ComponentLabeling connected_components(const SparseAdjacency& adj);

// Segmentation into nodes routed to the MLP branch (isolated side) and nodes
// kept in the filtered graph. Each sorted list doubles as the local->global
// back-map for its side.
struct NodePartition {
  std::vector<Index> isolated_nodes;
  std::vector<Index> connected_nodes;
};

// Components of size <= min_component_size go to the isolated side. With
// min_component_size = 1 that is exactly the degree-0 nodes.
NodePartition partition_nodes(const ComponentLabeling& labeling,
                              Index min_component_size);

struct InducedSubgraph {
  SparseAdjacency adj;               // local indices
  std::vector<Index> global_nodes;   // local i <-> global_nodes[i]
};

// Edges retained iff both endpoints are in `nodes` (sorted, unique).
InducedSubgraph induced_subgraph(const SparseAdjacency& adj,
                                 std::span<const Index> nodes);

}  // namespace hpgcn
