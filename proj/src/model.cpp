#include "hpgcn/model.hpp"

#include <cassert>
#include <cmath>

namespace hpgcn {

std::string to_string(GraphMode mode) {
  return mode == GraphMode::kHomo ? "homo" : "hetero";
}

GraphMode graph_mode_from_string(const std::string& s) {
  if (s == "homo") return GraphMode::kHomo;
  if (s == "hetero") return GraphMode::kHetero;
  throw std::invalid_argument("unknown mode: " + s);
}

void HpGcnConfig::validate(Index n_relations) const {
  if (k < 1) throw std::invalid_argument("filter order k must be >= 1");
  if (hidden_dim < 1) throw std::invalid_argument("hidden_dim must be >= 1");
  if (mlp_layers_connected < 0 || mlp_layers_head < 0)
    throw std::invalid_argument("layer counts must be >= 0");
  if (mlp_layers_isolated < 1)
    throw std::invalid_argument("isolated branch needs >= 1 layer");
  if (min_component_size < 1)
    throw std::invalid_argument("min_component_size must be >= 1");
  if (mode == GraphMode::kHetero && n_relations < 2)
    throw std::invalid_argument("hetero mode needs >= 2 relations");
}

GraphContext GraphContext::build(const AttributedGraph& g,
                                 const HpGcnConfig& cfg) {
  cfg.validate(static_cast<Index>(g.relations.size()));
  GraphContext ctx;
  ctx.union_adj = union_relations(g);
  ctx.union_deg = degrees(ctx.union_adj);
  ctx.components = connected_components(ctx.union_adj);
  if (cfg.filter_isolated_nodes) {
    ctx.partition.connected_nodes.resize(static_cast<size_t>(g.n_nodes()));
    for (Index i = 0; i < g.n_nodes(); ++i)
      ctx.partition.connected_nodes[static_cast<size_t>(i)] = i;
  } else {
    ctx.partition = partition_nodes(ctx.components, cfg.min_component_size);
  }
  if (ctx.partition.isolated_nodes.size() + ctx.partition.connected_nodes.size() !=
      static_cast<size_t>(g.n_nodes()))
    throw std::logic_error("partition does not cover the node set");

  ctx.connected_sub =
      induced_subgraph(ctx.union_adj, ctx.partition.connected_nodes);
  ctx.connected_deg = degrees(ctx.connected_sub.adj);
  if (cfg.mode == GraphMode::kHetero) {
    for (const auto& [name, adj] : g.relations) {
      ctx.relation_subs.push_back(
          induced_subgraph(adj, ctx.partition.connected_nodes));
      ctx.relation_degs.push_back(degrees(ctx.relation_subs.back().adj));
    }
  }
  return ctx;
}

ChebHighPassLayer::ChebHighPassLayer(const std::string& name, Index k_order,
                                     Index d_in, Index d_out, Rng& rng)
    : k(k_order),
      weight(name + ".w", nn::glorot_uniform(k_order * d_in, d_out, rng)),
      bias(name + ".b", Matrix::Zero(1, d_out)) {}

AffineLayer::AffineLayer(const std::string& name, Index d_in, Index d_out,
                         Rng& rng)
    : weight(name + ".w", nn::glorot_uniform(d_in, d_out, rng)),
      bias(name + ".b", Matrix::Zero(1, d_out)) {}

HpGcnModel::HpGcnModel(const HpGcnConfig& cfg, Index in_features,
                       Index n_relations)
    : config_(cfg), in_features_(in_features), n_relations_(n_relations) {
  cfg.validate(n_relations);
  if (in_features < 1) throw std::invalid_argument("need >= 1 feature");
  Rng rng(cfg.seed);
  const Index h = cfg.hidden_dim;

  if (cfg.mode == GraphMode::kHomo) {
    filters_.emplace_back("filter", cfg.k, in_features, h, rng);
  } else {
    for (Index r = 0; r < n_relations; ++r)
      filters_.emplace_back("filter.r" + std::to_string(r), cfg.k,
                            in_features, h, rng);
  }
  for (Index l = 0; l < cfg.mlp_layers_connected; ++l)
    connected_mlp_.emplace_back("conn_mlp." + std::to_string(l), h, h, rng);
  for (Index l = 0; l < cfg.mlp_layers_isolated; ++l)
    isolated_mlp_.emplace_back("iso_mlp." + std::to_string(l),
                               l == 0 ? in_features : h, h, rng);
  for (Index l = 0; l < cfg.mlp_layers_head; ++l)
    head_.emplace_back("head." + std::to_string(l), h, h, rng);
  head_.emplace_back("head.out", h, 2, rng);
}

std::vector<nn::Parameter*> HpGcnModel::parameters() {
  std::vector<nn::Parameter*> out;
  for (auto& f : filters_) {
    out.push_back(&f.weight);
    out.push_back(&f.bias);
  }
  for (auto* group : {&connected_mlp_, &isolated_mlp_, &head_}) {
    for (auto& layer : *group) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
  }
  return out;
}

std::vector<const nn::Parameter*> HpGcnModel::parameters() const {
  auto mutable_params = const_cast<HpGcnModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

nn::Tape::ValueRef cheb_highpass_forward(nn::Tape& tape,
                                         const SparseAdjacency& adj,
                                         const DegreeVector& deg,
                                         nn::Tape::ValueRef h,
                                         ChebHighPassLayer& layer) {
  std::vector<nn::Tape::ValueRef> blocks{h};
  nn::Tape::ValueRef power = h;
  for (Index k = 1; k < layer.k; ++k) {
    power = tape.laplacian_propagate(power, adj, deg);
    blocks.push_back(power);
  }
  const auto stacked =
      blocks.size() == 1 ? blocks[0] : tape.concat_cols(blocks);
  return tape.add_bias(tape.matmul(stacked, tape.parameter(layer.weight)),
                       tape.parameter(layer.bias));
}

namespace {

// [affine -> relu] chain.
nn::Tape::ValueRef mlp_forward(nn::Tape& tape, nn::Tape::ValueRef x,
                               std::vector<AffineLayer>& layers) {
  auto z = x;
  for (auto& layer : layers) {
    z = tape.relu(tape.add_bias(tape.matmul(z, tape.parameter(layer.weight)),
                                tape.parameter(layer.bias)));
  }
  return z;
}

nn::Tape::ValueRef head_forward(nn::Tape& tape, nn::Tape::ValueRef x,
                                std::vector<AffineLayer>& head) {
  auto z = x;
  for (size_t l = 0; l + 1 < head.size(); ++l) {
    z = tape.relu(tape.add_bias(tape.matmul(z, tape.parameter(head[l].weight)),
                                tape.parameter(head[l].bias)));
  }
  auto& out = head.back();
  return tape.add_bias(tape.matmul(z, tape.parameter(out.weight)),
                       tape.parameter(out.bias));
}

// Connected-branch hidden rows scattered back to global order, merged with
// the isolated branch, classified per row by the head.
nn::Tape::ValueRef merge_and_classify(nn::Tape& tape, const AttributedGraph& g,
                                      const GraphContext& ctx,
                                      HpGcnModel& model,
                                      nn::Tape::ValueRef features,
                                      nn::Tape::ValueRef connected_hidden,
                                      bool has_connected) {
  const Index n = g.n_nodes();
  std::vector<nn::Tape::ValueRef> scattered;
  if (has_connected) {
    scattered.push_back(tape.row_scatter(
        connected_hidden, ctx.partition.connected_nodes, n));
  }
  if (!ctx.partition.isolated_nodes.empty()) {
    auto xi = tape.row_select(features, ctx.partition.isolated_nodes);
    auto hi = mlp_forward(tape, xi, model.isolated_mlp());
    scattered.push_back(tape.row_scatter(hi, ctx.partition.isolated_nodes, n));
  }
  assert(!scattered.empty());
  auto merged =
      scattered.size() == 1 ? scattered[0] : tape.add(scattered[0], scattered[1]);
  return head_forward(tape, merged, model.head());
}

}  // namespace

nn::Tape::ValueRef forward_homo(nn::Tape& tape, const AttributedGraph& g,
                                const GraphContext& ctx, HpGcnModel& model) {
  auto features = tape.constant(g.features);
  nn::Tape::ValueRef connected_hidden{};
  const bool has_connected = !ctx.partition.connected_nodes.empty();
  if (has_connected) {
    auto xc = tape.row_select(features, ctx.partition.connected_nodes);
    auto z = cheb_highpass_forward(tape, ctx.connected_sub.adj,
                                   ctx.connected_deg, xc, model.filters()[0]);
    connected_hidden = mlp_forward(tape, z, model.connected_mlp());
  }
  return merge_and_classify(tape, g, ctx, model, features, connected_hidden,
                            has_connected);
}

nn::Tape::ValueRef forward_hetero(nn::Tape& tape, const AttributedGraph& g,
                                  const GraphContext& ctx, HpGcnModel& model) {
  if (ctx.relation_subs.size() != static_cast<size_t>(model.n_relations()))
    throw std::invalid_argument("context not built for hetero mode");
  auto features = tape.constant(g.features);
  nn::Tape::ValueRef connected_hidden{};
  const bool has_connected = !ctx.partition.connected_nodes.empty();
  if (has_connected) {
    auto xc = tape.row_select(features, ctx.partition.connected_nodes);
    std::vector<nn::Tape::ValueRef> filtered;
    for (size_t r = 0; r < ctx.relation_subs.size(); ++r) {
      filtered.push_back(cheb_highpass_forward(
          tape, ctx.relation_subs[r].adj, ctx.relation_degs[r], xc,
          model.filters()[r]));
    }
    auto pooled = tape.max_pool(filtered);
    connected_hidden = mlp_forward(tape, pooled, model.connected_mlp());
  }
  return merge_and_classify(tape, g, ctx, model, features, connected_hidden,
                            has_connected);
}

nn::Tape::ValueRef model_forward(nn::Tape& tape, const AttributedGraph& g,
                                 const GraphContext& ctx, HpGcnModel& model) {
  return model.config().mode == GraphMode::kHomo
             ? forward_homo(tape, g, ctx, model)
             : forward_hetero(tape, g, ctx, model);
}

Prediction predict(const Matrix& logits) {
  Prediction out;
  out.label.resize(static_cast<size_t>(logits.rows()));
  out.anomaly_score.resize(logits.rows());
  for (Index i = 0; i < logits.rows(); ++i) {
    out.label[static_cast<size_t>(i)] = logits(i, 1) > logits(i, 0) ? 1 : 0;
    // stable softmax probability of class 1
    const Scalar m = std::max(logits(i, 0), logits(i, 1));
    const Scalar e0 = std::exp(logits(i, 0) - m);
    const Scalar e1 = std::exp(logits(i, 1) - m);
    out.anomaly_score[i] = e1 / (e0 + e1);
  }
  return out;
}

}  // namespace hpgcn
