#include "sgood/encoder.hpp"

#include <stdexcept>

namespace sgood {

namespace {

void add_mlp_params(ParamSet& out, const std::string& prefix, int in, int hidden, int out_width,
                    std::uint64_t seed) {
  Rng rng1(derive_seed(seed, "init/" + prefix + ".w1"));
  Rng rng2(derive_seed(seed, "init/" + prefix + ".w2"));
  out[prefix + ".w1"] = glorot_uniform(in, hidden, rng1);
  out[prefix + ".b1"] = Tensor(1, hidden);
  out[prefix + ".w2"] = glorot_uniform(hidden, out_width, rng2);
  out[prefix + ".b2"] = Tensor(1, out_width);
}

NodeId mlp(Tape& tape, NodeId x, const ParamNodes& p, const std::string& prefix) {
  const NodeId h = tape.relu(tape.add(tape.matmul(x, p.at(prefix + ".w1")), p.at(prefix + ".b1")));
  return tape.add(tape.matmul(h, p.at(prefix + ".w2")), p.at(prefix + ".b2"));
}

NodeId gin_layer(Tape& tape, NodeId h, const std::vector<std::pair<int, int>>& directed,
                 const ParamNodes& p, const std::string& prefix) {
  const NodeId agg = tape.neighbor_sum(h, directed);
  const NodeId self = tape.add(h, tape.scale_by(h, p.at(prefix + ".eps")));
  return mlp(tape, tape.add(self, agg), p, prefix + ".mlp");
}

std::vector<std::pair<int, int>> both_directions(const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::pair<int, int>> out;
  out.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    out.emplace_back(u, v);
    out.emplace_back(v, u);
  }
  return out;
}

}  // namespace

ParamSet init_model_params(const EncoderConfig& cfg, std::uint64_t seed) {
  if (cfg.input_width < 1) throw std::invalid_argument("init_model_params: input width must be >= 1");
  if (cfg.node_layers < 1 || cfg.hidden < 1) {
    throw std::invalid_argument("init_model_params: bad layer or width config");
  }
  if (cfg.num_classes < 1) throw std::invalid_argument("init_model_params: need at least one class");

  ParamSet params;
  const int d = cfg.hidden;
  for (int l = 0; l < cfg.node_layers; ++l) {
    const std::string prefix = "node_gin." + std::to_string(l);
    add_mlp_params(params, prefix + ".mlp", l == 0 ? cfg.input_width : d, d, d, seed);
    params[prefix + ".eps"] = Tensor(1, 1);
  }
  if (cfg.super_branch) {
    if (cfg.super_layers < 1) throw std::invalid_argument("init_model_params: super_layers must be >= 1");
    add_mlp_params(params, "deepset.phi", cfg.node_embed_width(), d, d, seed);
    add_mlp_params(params, "deepset.rho", d, d, d, seed);
    for (int l = 0; l < cfg.super_layers; ++l) {
      const std::string prefix = "super_gin." + std::to_string(l);
      add_mlp_params(params, prefix + ".mlp", d, d, d, seed);
      params[prefix + ".eps"] = Tensor(1, 1);
    }
  }
  const int w = cfg.graph_embed_width();
  add_mlp_params(params, "proj", w, d, d, seed);
  Rng rng(derive_seed(seed, "init/clf.w"));
  params["clf.w"] = glorot_uniform(w, cfg.num_classes, rng);
  params["clf.b"] = Tensor(1, cfg.num_classes);
  return params;
}

SuperBatch make_super_batch(std::span<const GraphRef> items, bool with_super) {
  if (items.empty()) throw std::invalid_argument("make_super_batch: empty batch");
  SuperBatch b;
  b.graph_count = static_cast<int>(items.size());
  const int c = items.front().graph->feature_width;
  if (c < 1) throw std::invalid_argument("make_super_batch: graphs carry no features");

  int total_nodes = 0;
  for (const auto& item : items) total_nodes += item.graph->node_count;
  b.features = Tensor(total_nodes, c);

  for (std::size_t gi = 0; gi < items.size(); ++gi) {
    const Graph& g = *items[gi].graph;
    if (g.feature_width != c) {
      throw std::invalid_argument("make_super_batch: inconsistent feature width");
    }
    const int node_off = b.node_count;
    for (const auto& [u, v] : g.edges) b.node_edges.emplace_back(u + node_off, v + node_off);
    for (int v = 0; v < g.node_count; ++v) {
      const auto row = g.feature_row(v);
      for (int k = 0; k < c; ++k) b.features.at(node_off + v, k) = row[k];
      b.node_to_graph.push_back(static_cast<int>(gi));
    }
    if (with_super) {
      const Partition& part = *items[gi].partition;
      const SuperGraph& sg = *items[gi].super_graph;
      if (static_cast<int>(part.assignment.size()) != g.node_count ||
          sg.node_count != part.count) {
        throw std::invalid_argument("make_super_batch: partition does not match graph");
      }
      const int super_off = b.super_count;
      for (int v = 0; v < g.node_count; ++v) {
        const int id = part.assignment[v];
        if (id < 0 || id >= part.count) {
          throw std::invalid_argument("make_super_batch: node outside the partition");
        }
        b.node_to_super.push_back(super_off + id);
      }
      for (const auto& [j, k] : sg.edges) {
        b.super_cross_edges.emplace_back(super_off + j, super_off + k);
      }
      for (int s = 0; s < sg.node_count; ++s) b.super_to_graph.push_back(static_cast<int>(gi));
      b.super_count += sg.node_count;
      // every substructure must own at least one node
      std::vector<int> sizes(static_cast<std::size_t>(sg.node_count), 0);
      for (int v = 0; v < g.node_count; ++v) ++sizes[part.assignment[v]];
      for (const int s : sizes) {
        if (s == 0) throw std::invalid_argument("make_super_batch: empty substructure");
      }
    }
    b.node_count += g.node_count;
  }
  return b;
}

NodeId ParamNodes::at(const std::string& name) const {
  const auto it = ids.find(name);
  if (it == ids.end()) throw std::invalid_argument("ParamNodes: unknown parameter " + name);
  return it->second;
}

ParamNodes register_params(Tape& tape, const ParamSet& params) {
  ParamNodes out;
  for (const auto& [name, tensor] : params) out.ids.emplace(name, tape.input(tensor));
  return out;
}

std::vector<NodeId> gin_node_forward(Tape& tape, const SuperBatch& batch, const ParamNodes& p,
                                     const EncoderConfig& cfg) {
  const auto directed = both_directions(batch.node_edges);
  std::vector<NodeId> layers;
  NodeId h = tape.input(batch.features);
  for (int l = 0; l < cfg.node_layers; ++l) {
    h = gin_layer(tape, h, directed, p, "node_gin." + std::to_string(l));
    layers.push_back(h);
  }
  return layers;
}

NodeId node_multiscale(Tape& tape, std::span<const NodeId> layers) {
  if (layers.empty()) throw std::invalid_argument("node_multiscale: no layers");
  if (layers.size() == 1) return layers[0];
  return tape.concat_cols(layers);
}

NodeId deepset_pool(Tape& tape, NodeId multiscale, const SuperBatch& batch, const ParamNodes& p) {
  if (batch.super_count < 1) throw std::invalid_argument("deepset_pool: batch has no substructures");
  const NodeId phi = mlp(tape, multiscale, p, "deepset.phi");
  const NodeId sums = tape.segment_sum(phi, batch.node_to_super, batch.super_count);
  return mlp(tape, sums, p, "deepset.rho");
}

std::vector<NodeId> gin_super_forward(Tape& tape, const SuperBatch& batch, NodeId init,
                                      const ParamNodes& p, const EncoderConfig& cfg) {
  auto directed = both_directions(batch.super_cross_edges);
  for (int s = 0; s < batch.super_count; ++s) directed.emplace_back(s, s);  // self loops

  std::vector<NodeId> layers{init};
  NodeId h = init;
  for (int l = 0; l < cfg.super_layers; ++l) {
    h = gin_layer(tape, h, directed, p, "super_gin." + std::to_string(l));
    layers.push_back(h);
  }
  return layers;
}

NodeId super_readout(Tape& tape, std::span<const NodeId> layers, const SuperBatch& batch) {
  const NodeId concat = layers.size() == 1 ? layers[0] : tape.concat_cols(layers);
  return tape.segment_sum(concat, batch.super_to_graph, batch.graph_count);
}

NodeId node_readout(Tape& tape, NodeId multiscale, const SuperBatch& batch) {
  return tape.segment_sum(multiscale, batch.node_to_graph, batch.graph_count);
}

NodeId project(Tape& tape, NodeId h, const ParamNodes& p) {
  return tape.l2_normalize_rows(mlp(tape, h, p, "proj"));
}

NodeId classify(Tape& tape, NodeId h, const ParamNodes& p) {
  return tape.add(tape.matmul(h, p.at("clf.w")), p.at("clf.b"));
}

EncodeNodes encode_batch(Tape& tape, const SuperBatch& batch, const ParamNodes& p,
                         const EncoderConfig& cfg) {
  EncodeNodes out;
  const auto layers = gin_node_forward(tape, batch, p, cfg);
  out.multiscale = node_multiscale(tape, layers);
  out.h_graph_node = node_readout(tape, out.multiscale, batch);
  if (cfg.super_branch) {
    const NodeId init = deepset_pool(tape, out.multiscale, batch, p);
    const auto super_layers = gin_super_forward(tape, batch, init, p, cfg);
    out.h_graph_super = super_readout(tape, super_layers, batch);
    out.h_for_heads = out.h_graph_super;
  } else {
    out.h_for_heads = out.h_graph_node;
  }
  out.logits = classify(tape, out.h_for_heads, p);
  return out;
}

GraphEmbedding encode(const Graph& g, const Partition& part, const SuperGraph& s,
                      const ParamSet& params, const EncoderConfig& cfg) {
  const GraphRef ref{&g, &part, &s};
  const SuperBatch batch = make_super_batch(std::span(&ref, 1), cfg.super_branch);
  Tape tape;
  const ParamNodes p = register_params(tape, params);
  const EncodeNodes nodes = encode_batch(tape, batch, p, cfg);
  GraphEmbedding e;
  e.h_node = tape.value(nodes.h_graph_node);
  if (cfg.super_branch) e.h_super = tape.value(nodes.h_graph_super);
  e.logits = tape.value(nodes.logits);
  return e;
}

}  // namespace sgood
