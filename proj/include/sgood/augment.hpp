#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sgood/graph.hpp"
#include "sgood/rng.hpp"
#include "sgood/substructure.hpp"

namespace sgood {

enum class AugmentKind { Identity, SubstructureDrop, SuperGraphSample, SubstructureSubstitute };

// A mutated (graph, super graph) pair kept mutually consistent: the super
// graph always matches build_super_graph of the new graph and partition.
struct AugmentedPair {
  Graph graph;
  Partition partition;
  SuperGraph super_graph;
  bool pool_was_empty = false;  // substitution fell back to identity
};

// One harvested substructure: induced subgraph with features and labels.
struct Fragment {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> features;
  int feature_width = 0;
  std::vector<int> node_labels;
};

Fragment extract_fragment(const Graph& g, const Partition& p, int id);

// Per-class pools of training substructures used by substitution.
struct SubstitutionPools {
  std::vector<std::vector<Fragment>> by_class;
};

SubstitutionPools build_pools(const GraphDataset& dataset, std::span<const int> indices,
                              std::span<const Partition> partitions);

AugmentedPair identity_pair(const Graph& g, const Partition& p, const SuperGraph& s);

// Drops floor(ratio * n) substructures chosen uniformly, never all of them.
AugmentedPair substructure_drop(const Graph& g, const Partition& p, const SuperGraph& s,
                                double ratio, Rng& rng);

// Keeps max(1, ceil((1 - ratio) * n)) substructures collected by DFS from a
// random start super node, neighbors in random order; exhausted components
// restart from a random unvisited super node.
AugmentedPair super_graph_sample(const Graph& g, const Partition& p, const SuperGraph& s,
                                 double ratio, Rng& rng);

// Replaces floor(ratio * k) of the k super nodes with cross-edge degree one
// by pool substructures of the same class. Former cross edges keep their
// outside endpoint; the inside endpoint is resampled uniformly from the
// replacement's nodes. An empty pool yields identity with pool_was_empty set.
AugmentedPair substructure_substitute(const Graph& g, const Partition& p, const SuperGraph& s,
                                      std::span<const Fragment> class_pool, double ratio,
                                      Rng& rng);

AugmentKind draw_augment_kind(Rng& rng);

AugmentedPair apply_augment(AugmentKind kind, const Graph& g, const Partition& p,
                            const SuperGraph& s, std::span<const Fragment> class_pool,
                            double ratio, Rng& rng);

// Two independent uniform draws from {I, SD, SG, SS}, each applied to the
// input pair.
std::pair<AugmentedPair, AugmentedPair> sample_view_pair(const Graph& g, const Partition& p,
                                                         const SuperGraph& s,
                                                         std::span<const Fragment> class_pool,
                                                         double ratio, Rng& rng);

}  // namespace sgood
