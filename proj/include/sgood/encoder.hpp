#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sgood/graph.hpp"
#include "sgood/params.hpp"
#include "sgood/substructure.hpp"
#include "sgood/tape.hpp"

namespace sgood {

struct EncoderConfig {
  int node_layers = 3;   // L1
  int super_layers = 2;  // L2
  int hidden = 16;       // d
  int input_width = 0;   // c
  int num_classes = 0;   // C
  // When false the substructure branch is dropped entirely: the classifier,
  // projection head and scoring embedding all run off the node readout.
  bool super_branch = true;

  int node_embed_width() const { return node_layers * hidden; }
  int super_embed_width() const { return (super_layers + 1) * hidden; }
  int graph_embed_width() const { return super_branch ? super_embed_width() : node_embed_width(); }
};

// Glorot-uniform weights from per-name seeded streams; biases and the GIN
// epsilons start at zero.
ParamSet init_model_params(const EncoderConfig& cfg, std::uint64_t seed);

struct GraphRef {
  const Graph* graph = nullptr;
  const Partition* partition = nullptr;     // unused when super branch is off
  const SuperGraph* super_graph = nullptr;  // likewise
};

// Disjoint union of graphs plus the substructure bookkeeping the encoder
// needs: node->substructure and substructure->graph ownership, and the
// cross edges of the batched super graph.
struct SuperBatch {
  int node_count = 0;
  int super_count = 0;
  int graph_count = 0;
  Tensor features;  // node_count x c
  std::vector<std::pair<int, int>> node_edges;
  std::vector<std::pair<int, int>> super_cross_edges;
  std::vector<int> node_to_graph;
  std::vector<int> node_to_super;
  std::vector<int> super_to_graph;
};

SuperBatch make_super_batch(std::span<const GraphRef> items, bool with_super);

struct ParamNodes {
  std::map<std::string, NodeId> ids;
  NodeId at(const std::string& name) const;
};

ParamNodes register_params(Tape& tape, const ParamSet& params);

// GIN over the original graphs: h^(l+1) = MLP((1 + eps) h^(l) + sum of
// neighbor h^(l)). Returns H^(1..L1).
std::vector<NodeId> gin_node_forward(Tape& tape, const SuperBatch& batch, const ParamNodes& p,
                                     const EncoderConfig& cfg);

// Concatenation of H^(1..L1); the input features are excluded.
NodeId node_multiscale(Tape& tape, std::span<const NodeId> layers);

// h_g^(0) = rho(sum over members of phi(h_v)).
NodeId deepset_pool(Tape& tape, NodeId multiscale, const SuperBatch& batch, const ParamNodes& p);

// GIN over the super graph. Every super node carries one self loop, so its
// own vector enters the neighbor sum exactly once. Returns H^(0..L2) with
// layer 0 the DeepSet initials, untransformed.
std::vector<NodeId> gin_super_forward(Tape& tape, const SuperBatch& batch, NodeId init,
                                      const ParamNodes& p, const EncoderConfig& cfg);

// Per-graph sum of concat(H^(0..L2)) over super nodes.
NodeId super_readout(Tape& tape, std::span<const NodeId> layers, const SuperBatch& batch);

// Per-graph sum of the multiscale node vectors.
NodeId node_readout(Tape& tape, NodeId multiscale, const SuperBatch& batch);

// 2-layer MLP followed by l2 normalization.
NodeId project(Tape& tape, NodeId h, const ParamNodes& p);

// Single linear map to class logits.
NodeId classify(Tape& tape, NodeId h, const ParamNodes& p);

struct EncodeNodes {
  NodeId multiscale = -1;    // node_count x L1 d
  NodeId h_graph_node = -1;  // graph_count x L1 d
  NodeId h_graph_super = -1; // graph_count x (L2+1) d, -1 when branch is off
  NodeId h_for_heads = -1;   // classifier/projection input
  NodeId logits = -1;        // graph_count x C
};

EncodeNodes encode_batch(Tape& tape, const SuperBatch& batch, const ParamNodes& p,
                         const EncoderConfig& cfg);

// Plain-value embedding of one graph on a private tape.
struct GraphEmbedding {
  Tensor h_node;   // 1 x L1 d
  Tensor h_super;  // 1 x (L2+1) d, empty when the branch is off
  Tensor logits;   // 1 x C
};

GraphEmbedding encode(const Graph& g, const Partition& p, const SuperGraph& s,
                      const ParamSet& params, const EncoderConfig& cfg);

}  // namespace sgood
