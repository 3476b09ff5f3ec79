#pragma once

#include "hpgcn/graph.hpp"
#include "hpgcn/nn.hpp"
#include "hpgcn/types.hpp"

#include <string>
#include <vector>

namespace hpgcn {

enum class GraphMode { kHomo, kHetero };

std::string to_string(GraphMode mode);
GraphMode graph_mode_from_string(const std::string& s);

struct HpGcnConfig {
  Index k = 3;           // filter uses powers 0..k-1 of the Laplacian
  Index hidden_dim = 64;
  Index mlp_layers_connected = 2;
  Index mlp_layers_isolated = 2;
  Index mlp_layers_head = 1;  // hidden layers before the 2-class output
  GraphMode mode = GraphMode::kHomo;
  Index min_component_size = 1;
  bool weighted_loss = true;
  // Ablation switch: treat every node as connected and push isolated nodes
  // through the filter path instead of their MLP branch.
  bool filter_isolated_nodes = false;
  std::uint64_t seed = 11;

  void validate(Index n_relations) const;
};

// Immutable per-dataset machinery shared by every forward pass: the union
// graph, its partition, and the induced subgraph(s) the filter runs on.
struct GraphContext {
  SparseAdjacency union_adj;
  DegreeVector union_deg;
  ComponentLabeling components;
  NodePartition partition;
  InducedSubgraph connected_sub;  // union edges among connected nodes
  DegreeVector connected_deg;
  // hetero mode: relation edges restricted to the connected node set
  std::vector<InducedSubgraph> relation_subs;
  std::vector<DegreeVector> relation_degs;

  static GraphContext build(const AttributedGraph& g, const HpGcnConfig& cfg);
};

// Polynomial high-pass propagation with the per-power blocks concatenated
// and fused through one linear map: [H, LH, ..., L^{K-1}H] W + b.
struct ChebHighPassLayer {
  Index k;
  nn::Parameter weight;  // (k * d_in) x d_out
  nn::Parameter bias;    // 1 x d_out

  ChebHighPassLayer(const std::string& name, Index k_order, Index d_in,
                    Index d_out, Rng& rng);
};

struct AffineLayer {
  nn::Parameter weight;
  nn::Parameter bias;

  AffineLayer(const std::string& name, Index d_in, Index d_out, Rng& rng);
};

// The two-branch detector: filtered connected subgraph + MLP for isolated
// nodes, merged and classified by a shared head.
class HpGcnModel {
 public:
  HpGcnModel(const HpGcnConfig& cfg, Index in_features, Index n_relations);

  const HpGcnConfig& config() const { return config_; }
  Index in_features() const { return in_features_; }
  Index n_relations() const { return n_relations_; }

  // One layer in homo mode, one per relation in hetero mode.
  std::vector<ChebHighPassLayer>& filters() { return filters_; }
  std::vector<AffineLayer>& connected_mlp() { return connected_mlp_; }
  std::vector<AffineLayer>& isolated_mlp() { return isolated_mlp_; }
  std::vector<AffineLayer>& head() { return head_; }

  // Registration order is fixed; checkpoints rely on it only via names.
  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;

 private:
  HpGcnConfig config_;
  Index in_features_;
  Index n_relations_;
  std::vector<ChebHighPassLayer> filters_;
  std::vector<AffineLayer> connected_mlp_;
  std::vector<AffineLayer> isolated_mlp_;
  std::vector<AffineLayer> head_;
};

// [h, Lh, ..., L^{k-1}h] -> concat -> affine.
nn::Tape::ValueRef cheb_highpass_forward(nn::Tape& tape,
                                         const SparseAdjacency& adj,
                                         const DegreeVector& deg,
                                         nn::Tape::ValueRef h,
                                         ChebHighPassLayer& layer);

// Single filter on the union subgraph.
nn::Tape::ValueRef forward_homo(nn::Tape& tape, const AttributedGraph& g,
                                const GraphContext& ctx, HpGcnModel& model);

// Per-relation filters pooled entrywise (max) before the shared MLP.
nn::Tape::ValueRef forward_hetero(nn::Tape& tape, const AttributedGraph& g,
                                  const GraphContext& ctx, HpGcnModel& model);

// Dispatch on config().mode.
nn::Tape::ValueRef model_forward(nn::Tape& tape, const AttributedGraph& g,
                                 const GraphContext& ctx, HpGcnModel& model);

struct Prediction {
  std::vector<int> label;  // argmax, ties to class 0
  Vector anomaly_score;    // softmax probability of class 1
};

Prediction predict(const Matrix& logits);

}  // namespace hpgcn
