#include "hpgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

namespace hpgcn {

SparseAdjacency::SparseAdjacency(Index n_nodes, std::vector<Index> row_offsets,
                                 std::vector<Index> col_indices,
                                 std::vector<Scalar> edge_weights)
    : n_(n_nodes),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      edge_weights_(std::move(edge_weights)) {
  validate();
}

void SparseAdjacency::validate() const {
  if (n_ < 0) throw std::invalid_argument("negative node count");
  if (row_offsets_.size() != static_cast<size_t>(n_) + 1)
    throw std::invalid_argument("row_offsets length must be n_nodes + 1");
  if (row_offsets_.front() != 0)
    throw std::invalid_argument("row_offsets[0] must be 0");
  if (row_offsets_.back() != nnz())
    throw std::invalid_argument("row_offsets[n] must equal nnz");
  if (col_indices_.size() != edge_weights_.size())
    throw std::invalid_argument("col/weight length mismatch");
  for (Index i = 0; i < n_; ++i) {
    if (row_offsets_[i + 1] < row_offsets_[i])
      throw std::invalid_argument("row_offsets must be non-decreasing");
    for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const Index j = col_indices_[k];
      if (j < 0 || j >= n_) throw std::invalid_argument("col index out of range");
      if (j == i) throw std::invalid_argument("self-loop in CSR buffers");
      if (k > row_offsets_[i] && col_indices_[k - 1] >= j)
        throw std::invalid_argument("cols must be strictly increasing per row");
      if (!(edge_weights_[k] >= 0.0))
        throw std::invalid_argument("edge weights must be non-negative");
    }
  }
  for (Index i = 0; i < n_; ++i) {
    for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (weight(col_indices_[k], i) != edge_weights_[k])
        throw std::invalid_argument("adjacency must be symmetric");
    }
  }
}

std::span<const Index> SparseAdjacency::neighbors(Index i) const {
  return {col_indices_.data() + row_offsets_[i],
          static_cast<size_t>(row_offsets_[i + 1] - row_offsets_[i])};
}

std::span<const Scalar> SparseAdjacency::weights(Index i) const {
  return {edge_weights_.data() + row_offsets_[i],
          static_cast<size_t>(row_offsets_[i + 1] - row_offsets_[i])};
}

Scalar SparseAdjacency::weight(Index u, Index v) const {
  const auto ns = neighbors(u);
  const auto it = std::lower_bound(ns.begin(), ns.end(), v);
  if (it == ns.end() || *it != v) return 0.0;
  return edge_weights_[row_offsets_[u] + (it - ns.begin())];
}

SparseAdjacency build_adjacency(Index n_nodes, std::span<const Edge> edges) {
  if (n_nodes < 0) throw std::invalid_argument("negative node count");
  std::vector<std::tuple<Index, Index, Scalar>> entries;
  entries.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= n_nodes || e.v < 0 || e.v >= n_nodes)
      throw std::invalid_argument("edge index out of range");
    if (!(e.w >= 0.0))
      throw std::invalid_argument("edge weights must be non-negative");
    if (e.u == e.v) continue;  // self-loops stripped
    entries.emplace_back(e.u, e.v, e.w);
    entries.emplace_back(e.v, e.u, e.w);
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) {
              return std::tie(std::get<0>(a), std::get<1>(a)) <
                     std::tie(std::get<0>(b), std::get<1>(b));
            });

  std::vector<Index> offsets(static_cast<size_t>(n_nodes) + 1, 0);
  std::vector<Index> cols;
  std::vector<Scalar> weights;
  cols.reserve(entries.size());
  weights.reserve(entries.size());
  for (size_t k = 0; k < entries.size();) {
    const auto [r, c, w0] = entries[k];
    Scalar w = w0;
    for (++k; k < entries.size() && std::get<0>(entries[k]) == r &&
              std::get<1>(entries[k]) == c;
         ++k) {
      w += std::get<2>(entries[k]);  // duplicates merge by weight sum
    }
    cols.push_back(c);
    weights.push_back(w);
    offsets[r + 1] += 1;
  }
  for (Index i = 0; i < n_nodes; ++i) offsets[i + 1] += offsets[i];
  return SparseAdjacency(n_nodes, std::move(offsets), std::move(cols),
                         std::move(weights));
}

const SparseAdjacency& AttributedGraph::relation(const std::string& name) const {
  for (const auto& [rel_name, adj] : relations) {
    if (rel_name == name) return adj;
  }
  throw std::invalid_argument("unknown relation: " + name);
}

void AttributedGraph::validate() const {
  if (relations.empty())
    throw std::invalid_argument("graph needs at least one relation");
  for (const auto& [name, adj] : relations) {
    if (adj.n_nodes() != n_nodes())
      throw std::invalid_argument("relation " + name +
                                  " disagrees on node count");
  }
  if (static_cast<Index>(labels.size()) != n_nodes())
    throw std::invalid_argument("label count must equal node count");
  if (!features.allFinite())
    throw std::invalid_argument("features must be finite");
  for (const int y : labels) {
    if (y != kLabelNormal && y != kLabelAnomaly && y != kLabelUnknown)
      throw std::invalid_argument("labels must be 0, 1, or unknown");
  }
}

DegreeVector degrees(const SparseAdjacency& adj) {
  const Index n = adj.n_nodes();
  DegreeVector out;
  out.d = Vector::Zero(n);
  out.d_inv_sqrt = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    Scalar s = 0.0;
    for (const Scalar w : adj.weights(i)) s += w;
    out.d[i] = s;
    out.d_inv_sqrt[i] = s > 0.0 ? 1.0 / std::sqrt(s) : 0.0;
  }
  return out;
}

Vector laplacian_matvec(const SparseAdjacency& adj, const DegreeVector& deg,
                        const Vector& x) {
  const Index n = adj.n_nodes();
  if (x.size() != n) throw std::invalid_argument("signal length mismatch");
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    const auto ns = adj.neighbors(i);
    const auto ws = adj.weights(i);
    Scalar acc = 0.0;
    for (size_t k = 0; k < ns.size(); ++k) {
      acc += ws[k] * deg.d_inv_sqrt[ns[k]] * x[ns[k]];
    }
    y[i] = x[i] - deg.d_inv_sqrt[i] * acc;
  }
  return y;
}

Matrix laplacian_propagate(const SparseAdjacency& adj, const DegreeVector& deg,
                           const Matrix& h) {
  const Index n = adj.n_nodes();
  if (h.rows() != n) throw std::invalid_argument("signal row count mismatch");
  Matrix y(n, h.cols());
  Eigen::RowVectorXd acc(h.cols());
  for (Index i = 0; i < n; ++i) {
    const auto ns = adj.neighbors(i);
    const auto ws = adj.weights(i);
    acc.setZero();
    for (size_t k = 0; k < ns.size(); ++k) {
      acc += (ws[k] * deg.d_inv_sqrt[ns[k]]) * h.row(ns[k]);
    }
    y.row(i) = h.row(i) - deg.d_inv_sqrt[i] * acc;
  }
  return y;
}

SparseAdjacency union_relations(const AttributedGraph& g) {
  g.validate();
  const Index n = g.n_nodes();
  std::vector<Index> offsets(static_cast<size_t>(n) + 1, 0);
  std::vector<Index> cols;
  std::vector<Index> merged;
  for (Index i = 0; i < n; ++i) {
    merged.clear();
    for (const auto& [name, adj] : g.relations) {
      const auto ns = adj.neighbors(i);
      merged.insert(merged.end(), ns.begin(), ns.end());
    }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    cols.insert(cols.end(), merged.begin(), merged.end());
    offsets[i + 1] = static_cast<Index>(cols.size());
  }
  std::vector<Scalar> weights(cols.size(), 1.0);
  return SparseAdjacency(n, std::move(offsets), std::move(cols),
                         std::move(weights));
}

ComponentLabeling connected_components(const SparseAdjacency& adj) {
  const Index n = adj.n_nodes();
  ComponentLabeling out;
  out.component_id.assign(n, -1);
  std::vector<Index> stack;
  for (Index start = 0; start < n; ++start) {
    if (out.component_id[start] >= 0) continue;
    const Index id = out.num_components();
    out.component_sizes.push_back(0);
    stack.push_back(start);
    out.component_id[start] = id;
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      out.component_sizes[id] += 1;
      for (const Index v : adj.neighbors(u)) {
        if (out.component_id[v] < 0) {
          out.component_id[v] = id;
          stack.push_back(v);
        }
      }
    }
  }
  return out;
}

NodePartition partition_nodes(const ComponentLabeling& labeling,
                              Index min_component_size) {
  if (min_component_size < 1)
    throw std::invalid_argument("min_component_size must be >= 1");
  NodePartition out;
  for (Index i = 0; i < static_cast<Index>(labeling.component_id.size()); ++i) {
    const Index size = labeling.component_sizes[labeling.component_id[i]];
    if (size <= min_component_size) {
      out.isolated_nodes.push_back(i);
    } else {
      out.connected_nodes.push_back(i);
    }
  }
  return out;
}

InducedSubgraph induced_subgraph(const SparseAdjacency& adj,
                                 std::span<const Index> nodes) {
  const Index n = adj.n_nodes();
  std::vector<Index> local_of(n, -1);
  for (size_t k = 0; k < nodes.size(); ++k) {
    const Index v = nodes[k];
    if (v < 0 || v >= n) throw std::invalid_argument("node index out of range");
    if (k > 0 && nodes[k - 1] >= v)
      throw std::invalid_argument("node list must be sorted and unique");
    local_of[v] = static_cast<Index>(k);
  }

  const Index m = static_cast<Index>(nodes.size());
  std::vector<Index> offsets(static_cast<size_t>(m) + 1, 0);
  std::vector<Index> cols;
  std::vector<Scalar> weights;
  for (Index li = 0; li < m; ++li) {
    const Index gi = nodes[li];
    const auto ns = adj.neighbors(gi);
    const auto ws = adj.weights(gi);
    for (size_t k = 0; k < ns.size(); ++k) {
      const Index lj = local_of[ns[k]];
      if (lj < 0) continue;
      cols.push_back(lj);  // sorted order preserved: local order is global order
      weights.push_back(ws[k]);
    }
    offsets[li + 1] = static_cast<Index>(cols.size());
  }
  InducedSubgraph out;
  out.adj = SparseAdjacency(m, std::move(offsets), std::move(cols),
                            std::move(weights));
  out.global_nodes.assign(nodes.begin(), nodes.end());
  return out;
}

}  // namespace hpgcn
