#include "sgood/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sgood/rng.hpp"

namespace sgood {

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(node_count), 0);
  for (const auto& [u, v] : edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

std::vector<std::vector<int>> Graph::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(node_count));
  for (const auto& [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return adj;
}

Graph make_graph(int node_count, std::vector<std::pair<int, int>> edges) {
  if (node_count < 0) throw std::invalid_argument("make_graph: negative node count");
  for (auto& [u, v] : edges) {
    if (u < 0 || u >= node_count || v < 0 || v >= node_count) {
      throw std::invalid_argument("make_graph: edge endpoint out of range");
    }
    if (u == v) throw std::invalid_argument("make_graph: self loop");
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Graph g;
  g.node_count = node_count;
  g.edges = std::move(edges);
  return g;
}

Splits split_dataset(const GraphDataset& dataset, SplitRatios ratios, std::uint64_t seed) {
  if (dataset.graphs.empty()) throw std::invalid_argument("split_dataset: empty dataset");
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split_dataset: ratios must sum to 1");
  }
  const int n = static_cast<int>(dataset.graphs.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(order);

  const int n_val = static_cast<int>(std::floor(n * ratios.val));
  const int n_test = static_cast<int>(std::floor(n * ratios.test));
  const int n_train = n - n_val - n_test;

  Splits s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test_id.assign(order.begin() + n_train + n_val, order.end());
  return s;
}

void assemble_test_set(Splits& splits, const GraphDataset& ood, std::uint64_t seed) {
  const int want = static_cast<int>(splits.test_id.size());
  const int have = static_cast<int>(ood.graphs.size());
  if (have < want) {
    throw std::invalid_argument("assemble_test_set: not enough OOD graphs");
  }
  Rng rng(derive_seed(seed, "ood-sample"));
  splits.test_ood = rng.sample_without_replacement(have, want);
}

std::vector<double> degree_features(const Graph& g, int max_degree) {
  const auto deg = g.degrees();
  std::vector<double> out(static_cast<std::size_t>(g.node_count) * (max_degree + 1), 0.0);
  for (int v = 0; v < g.node_count; ++v) {
    if (deg[v] > max_degree) {
      throw std::invalid_argument("degree_features: degree exceeds max_degree");
    }
    out[static_cast<std::size_t>(v) * (max_degree + 1) + deg[v]] = 1.0;
  }
  return out;
}

int max_degree(const GraphDataset& dataset) {
  int m = 0;
  for (const auto& g : dataset.graphs) {
    for (const int d : g.degrees()) m = std::max(m, d);
  }
  return m;
}

void apply_degree_features(GraphDataset& dataset) {
  const int md = max_degree(dataset);
  for (auto& g : dataset.graphs) {
    g.features = degree_features(g, md);
    g.feature_width = md + 1;
  }
  dataset.feature_width = md + 1;
  dataset.feature_source = FeatureSource::DegreeOneHot;
}

Graph cycle_graph(int n) {
  if (n < 3) throw std::invalid_argument("cycle_graph: need at least 3 nodes");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return make_graph(n, std::move(edges));
}

Graph disjoint_union(const Graph& a, const Graph& b) {
  Graph g;
  g.node_count = a.node_count + b.node_count;
  g.edges = a.edges;
  for (const auto& [u, v] : b.edges) g.edges.emplace_back(u + a.node_count, v + a.node_count);
  if (a.feature_width == b.feature_width && a.feature_width > 0) {
    g.feature_width = a.feature_width;
    g.features = a.features;
    g.features.insert(g.features.end(), b.features.begin(), b.features.end());
  }
  if (!a.node_labels.empty() && !b.node_labels.empty()) {
    g.node_labels = a.node_labels;
    g.node_labels.insert(g.node_labels.end(), b.node_labels.begin(), b.node_labels.end());
  }
  return g;
}

namespace {

void label_onehot_features(GraphDataset& ds, const std::vector<int>& values) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < values.size(); ++i) pairs.emplace_back(values[i], static_cast<int>(i));
  const int width = static_cast<int>(values.size());
  for (auto& g : ds.graphs) {
    g.feature_width = width;
    g.features.assign(static_cast<std::size_t>(g.node_count) * width, 0.0);
    for (int v = 0; v < g.node_count; ++v) {
      int idx = -1;
      for (const auto& [val, k] : pairs) {
        if (val == g.node_labels[v]) idx = k;
      }
      if (idx < 0) throw std::logic_error("label_onehot_features: unseen label");
      g.features[static_cast<std::size_t>(v) * width + idx] = 1.0;
    }
  }
  ds.feature_width = width;
  ds.feature_source = FeatureSource::NodeLabelOneHot;
}

}  // namespace

void harmonize_features(GraphDataset& id, GraphDataset& ood) {
  const bool both_attr = id.feature_source == FeatureSource::Attributes &&
                         ood.feature_source == FeatureSource::Attributes &&
                         id.feature_width == ood.feature_width && id.feature_width > 0;
  if (both_attr) return;

  const auto has_labels = [](const GraphDataset& ds) {
    return !ds.graphs.empty() &&
           std::all_of(ds.graphs.begin(), ds.graphs.end(),
                       [](const Graph& g) { return !g.node_labels.empty() || g.node_count == 0; });
  };
  if (has_labels(id) && has_labels(ood)) {
    std::vector<int> values;
    for (const GraphDataset* ds : {&id, &ood}) {
      for (const auto& g : ds->graphs) {
        for (const int l : g.node_labels) {
          if (std::find(values.begin(), values.end(), l) == values.end()) values.push_back(l);
        }
      }
    }
    std::sort(values.begin(), values.end());
    label_onehot_features(id, values);
    label_onehot_features(ood, values);
    return;
  }

  const int md = std::max(max_degree(id), max_degree(ood));
  for (GraphDataset* ds : {&id, &ood}) {
    for (auto& g : ds->graphs) {
      g.features = degree_features(g, md);
      g.feature_width = md + 1;
    }
    ds->feature_width = md + 1;
    ds->feature_source = FeatureSource::DegreeOneHot;
  }
}

BatchedGraph disjoint_union_batch(std::span<const Graph* const> graphs) {
  if (graphs.empty()) throw std::invalid_argument("disjoint_union_batch: empty list");
  BatchedGraph b;
  b.graph_count = static_cast<int>(graphs.size());
  b.feature_width = graphs.front()->feature_width;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const Graph& g = *graphs[gi];
    if (g.feature_width != b.feature_width) {
      throw std::invalid_argument("disjoint_union_batch: inconsistent feature width");
    }
    b.node_offsets.push_back(b.node_count);
    for (const auto& [u, v] : g.edges) {
      b.edges.emplace_back(u + b.node_count, v + b.node_count);
    }
    b.features.insert(b.features.end(), g.features.begin(), g.features.end());
    b.node_to_graph.insert(b.node_to_graph.end(), static_cast<std::size_t>(g.node_count),
                           static_cast<int>(gi));
    b.node_count += g.node_count;
  }
  return b;
}

}  // namespace sgood
