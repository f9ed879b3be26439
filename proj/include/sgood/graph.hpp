#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sgood {

// Undirected graph with per-node feature vectors. Edges are stored once with
// u < v, sorted and deduplicated; input graphs carry no self loops.
struct Graph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> features;  // node_count x feature_width, row-major
  int feature_width = 0;
  std::optional<int> label;
  std::vector<int> node_labels;  // empty when the dataset has none

  std::span<const double> feature_row(int v) const {
    return {features.data() + static_cast<std::size_t>(v) * feature_width,
            static_cast<std::size_t>(feature_width)};
  }
  std::vector<int> degrees() const;
  std::vector<std::vector<int>> adjacency() const;

  bool operator==(const Graph&) const = default;
};

// Canonicalizes the edge list (orders endpoints, sorts, dedupes) and checks
// endpoints. Throws std::invalid_argument on self loops or bad indices.
Graph make_graph(int node_count, std::vector<std::pair<int, int>> edges);

enum class FeatureSource { None, Attributes, NodeLabelOneHot, DegreeOneHot };

struct GraphDataset {
  std::string name;
  std::vector<Graph> graphs;
  int num_classes = 0;
  int feature_width = 0;
  std::vector<int> original_labels;  // dense class id -> label value in the source
  FeatureSource feature_source = FeatureSource::None;

  bool operator==(const GraphDataset&) const = default;
};

struct Splits {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test_id;
  std::vector<int> test_ood;  // indices into the OOD dataset
};

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

// Seeded shuffle then partition; val/test get floor(N * ratio) graphs and the
// remainder goes to train.
Splits split_dataset(const GraphDataset& dataset, SplitRatios ratios, std::uint64_t seed);

// Samples |test_id| OOD graphs without replacement into splits.test_ood.
void assemble_test_set(Splits& splits, const GraphDataset& ood, std::uint64_t seed);

// One-hot of the node degree, width max_degree + 1. Throws when a degree
// exceeds max_degree.
std::vector<double> degree_features(const Graph& g, int max_degree);

int max_degree(const GraphDataset& dataset);

// Degree one-hot features for every graph, width = dataset max degree + 1.
void apply_degree_features(GraphDataset& dataset);

// Block-diagonal union of member graphs.
struct BatchedGraph {
  int node_count = 0;
  int graph_count = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> features;
  int feature_width = 0;
  std::vector<int> node_to_graph;
  std::vector<int> node_offsets;  // node_offsets[g] = first node of graph g
};

BatchedGraph disjoint_union_batch(std::span<const Graph* const> graphs);

// n-cycle (n >= 3).
Graph cycle_graph(int n);

// One graph holding disjoint copies of a and b. Features and node labels are
// carried over when both sides have them.
Graph disjoint_union(const Graph& a, const Graph& b);

// Makes ID and OOD datasets share one feature space: matching attribute
// widths are kept; otherwise node-label one-hots over the union of label
// values, else degree one-hots with a shared maximum degree.
void harmonize_features(GraphDataset& id, GraphDataset& ood);

}  // namespace sgood
