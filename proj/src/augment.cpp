#include "sgood/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgood {

namespace {

// Rebuilds the pair restricted to the given substructures (sorted ids).
AugmentedPair keep_substructures(const Graph& g, const Partition& p,
                                 const std::vector<int>& kept) {
  std::vector<int> new_super(static_cast<std::size_t>(p.count), -1);
  for (std::size_t i = 0; i < kept.size(); ++i) new_super[kept[i]] = static_cast<int>(i);

  std::vector<int> new_node(static_cast<std::size_t>(g.node_count), -1);
  AugmentedPair out;
  Graph& ng = out.graph;
  ng.feature_width = g.feature_width;
  ng.label = g.label;
  for (int v = 0; v < g.node_count; ++v) {
    const int id = p.assignment[v];
    if (new_super[id] < 0) continue;
    new_node[v] = ng.node_count++;
    out.partition.assignment.push_back(new_super[id]);
    const auto row = g.feature_row(v);
    ng.features.insert(ng.features.end(), row.begin(), row.end());
    if (!g.node_labels.empty()) ng.node_labels.push_back(g.node_labels[v]);
  }
  out.partition.count = static_cast<int>(kept.size());
  for (const auto& [u, v] : g.edges) {
    if (new_node[u] >= 0 && new_node[v] >= 0) ng.edges.emplace_back(new_node[u], new_node[v]);
  }
  Graph canon = make_graph(ng.node_count, std::move(ng.edges));
  ng.edges = std::move(canon.edges);
  out.super_graph = build_super_graph(ng, out.partition);
  return out;
}

}  // namespace

Fragment extract_fragment(const Graph& g, const Partition& p, int id) {
  if (id < 0 || id >= p.count) throw std::invalid_argument("extract_fragment: id out of range");
  std::vector<int> local(static_cast<std::size_t>(g.node_count), -1);
  Fragment f;
  f.feature_width = g.feature_width;
  for (int v = 0; v < g.node_count; ++v) {
    if (p.assignment[v] != id) continue;
    local[v] = f.node_count++;
    const auto row = g.feature_row(v);
    f.features.insert(f.features.end(), row.begin(), row.end());
    if (!g.node_labels.empty()) f.node_labels.push_back(g.node_labels[v]);
  }
  for (const auto& [u, v] : g.edges) {
    if (local[u] >= 0 && local[v] >= 0) f.edges.emplace_back(local[u], local[v]);
  }
  return f;
}

SubstitutionPools build_pools(const GraphDataset& dataset, std::span<const int> indices,
                              std::span<const Partition> partitions) {
  SubstitutionPools pools;
  pools.by_class.resize(static_cast<std::size_t>(std::max(dataset.num_classes, 1)));
  for (const int idx : indices) {
    const Graph& g = dataset.graphs[idx];
    const Partition& p = partitions[idx];
    const int cls = g.label.value_or(0);
    for (int id = 0; id < p.count; ++id) {
      pools.by_class[cls].push_back(extract_fragment(g, p, id));
    }
  }
  return pools;
}

AugmentedPair identity_pair(const Graph& g, const Partition& p, const SuperGraph& s) {
  return {g, p, s, false};
}

AugmentedPair substructure_drop(const Graph& g, const Partition& p, const SuperGraph& s,
                                double ratio, Rng& rng) {
  const int n = p.count;
  if (n < 1) throw std::invalid_argument("substructure_drop: empty partition");
  int k = static_cast<int>(std::floor(ratio * n));
  k = std::min(k, n - 1);  // never drop everything
  if (k <= 0) return identity_pair(g, p, s);

  const std::vector<int> dropped = rng.sample_without_replacement(n, k);
  std::vector<char> is_dropped(static_cast<std::size_t>(n), 0);
  for (const int id : dropped) is_dropped[id] = 1;
  std::vector<int> kept;
  for (int id = 0; id < n; ++id) {
    if (!is_dropped[id]) kept.push_back(id);
  }
  return keep_substructures(g, p, kept);
}

AugmentedPair super_graph_sample(const Graph& g, const Partition& p, const SuperGraph& s,
                                 double ratio, Rng& rng) {
  const int n = p.count;
  if (n < 1) throw std::invalid_argument("super_graph_sample: empty partition");
  const int target = std::max(1, static_cast<int>(std::ceil((1.0 - ratio) * n)));
  if (target >= n) return identity_pair(g, p, s);

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& [u, v] : s.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }

  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  std::vector<int> collected;
  std::vector<int> stack;
  while (static_cast<int>(collected.size()) < target) {
    if (stack.empty()) {
      std::vector<int> unvisited;
      for (int id = 0; id < n; ++id) {
        if (!visited[id]) unvisited.push_back(id);
      }
      const int start = unvisited[rng.uniform(unvisited.size())];
      visited[start] = 1;
      stack.push_back(start);
      collected.push_back(start);
      if (static_cast<int>(collected.size()) >= target) break;
    }
    const int v = stack.back();
    std::vector<int> next;
    for (const int u : adj[v]) {
      if (!visited[u]) next.push_back(u);
    }
    if (next.empty()) {
      stack.pop_back();
      continue;
    }
    const int u = next[rng.uniform(next.size())];
    visited[u] = 1;
    stack.push_back(u);
    collected.push_back(u);
  }

  std::sort(collected.begin(), collected.end());
  return keep_substructures(g, p, collected);
}

AugmentedPair substructure_substitute(const Graph& g, const Partition& p, const SuperGraph& s,
                                      std::span<const Fragment> class_pool, double ratio,
                                      Rng& rng) {
  const auto super_deg = s.degrees();
  std::vector<int> candidates;
  for (int id = 0; id < s.node_count; ++id) {
    if (super_deg[id] == 1) candidates.push_back(id);
  }
  if (candidates.empty()) return identity_pair(g, p, s);
  const int k = static_cast<int>(std::floor(ratio * static_cast<double>(candidates.size())));
  if (k <= 0) return identity_pair(g, p, s);
  if (class_pool.empty()) {
    AugmentedPair out = identity_pair(g, p, s);
    out.pool_was_empty = true;
    return out;
  }

  std::vector<int> picks = rng.sample_without_replacement(static_cast<int>(candidates.size()), k);
  std::vector<int> replaced(static_cast<std::size_t>(p.count), -1);  // id -> pool index
  for (const int pick : picks) {
    replaced[candidates[pick]] = static_cast<int>(rng.uniform(class_pool.size()));
  }

  // Kept original nodes first (original order), then each replacement's
  // nodes grouped by substructure id.
  AugmentedPair out;
  Graph& ng = out.graph;
  ng.feature_width = g.feature_width;
  ng.label = g.label;
  out.partition.count = p.count;
  const bool labeled = !g.node_labels.empty();

  std::vector<int> new_node(static_cast<std::size_t>(g.node_count), -1);
  for (int v = 0; v < g.node_count; ++v) {
    if (replaced[p.assignment[v]] >= 0) continue;
    new_node[v] = ng.node_count++;
    out.partition.assignment.push_back(p.assignment[v]);
    const auto row = g.feature_row(v);
    ng.features.insert(ng.features.end(), row.begin(), row.end());
    if (labeled) ng.node_labels.push_back(g.node_labels[v]);
  }
  std::vector<int> frag_offset(static_cast<std::size_t>(p.count), -1);
  for (int id = 0; id < p.count; ++id) {
    if (replaced[id] < 0) continue;
    const Fragment& f = class_pool[replaced[id]];
    if (f.feature_width != g.feature_width) {
      throw std::invalid_argument("substructure_substitute: pool feature width mismatch");
    }
    frag_offset[id] = ng.node_count;
    for (int v = 0; v < f.node_count; ++v) {
      out.partition.assignment.push_back(id);
      if (labeled) ng.node_labels.push_back(f.node_labels.empty() ? 0 : f.node_labels[v]);
    }
    ng.features.insert(ng.features.end(), f.features.begin(), f.features.end());
    ng.node_count += f.node_count;
    for (const auto& [u, v] : f.edges) {
      ng.edges.emplace_back(frag_offset[id] + u, frag_offset[id] + v);
    }
  }

  const auto remap = [&](int v) {
    const int id = p.assignment[v];
    if (replaced[id] < 0) return new_node[v];
    const Fragment& f = class_pool[replaced[id]];
    return frag_offset[id] + static_cast<int>(rng.uniform(static_cast<std::uint64_t>(f.node_count)));
  };
  for (const auto& [u, v] : g.edges) {
    const int a = p.assignment[u];
    const int b = p.assignment[v];
    if (a == b) {
      if (replaced[a] < 0) ng.edges.emplace_back(new_node[u], new_node[v]);
      continue;  // internal edges of replaced substructures are gone
    }
    ng.edges.emplace_back(remap(u), remap(v));  // cross edge, endpoints reattached as needed
  }

  Graph canon = make_graph(ng.node_count, std::move(ng.edges));
  ng.edges = std::move(canon.edges);
  out.super_graph = build_super_graph(ng, out.partition);
  return out;
}

AugmentKind draw_augment_kind(Rng& rng) {
  switch (rng.uniform(4)) {
    case 0: return AugmentKind::Identity;
    case 1: return AugmentKind::SubstructureDrop;
    case 2: return AugmentKind::SuperGraphSample;
    default: return AugmentKind::SubstructureSubstitute;
  }
}

AugmentedPair apply_augment(AugmentKind kind, const Graph& g, const Partition& p,
                            const SuperGraph& s, std::span<const Fragment> class_pool,
                            double ratio, Rng& rng) {
  switch (kind) {
    case AugmentKind::Identity: return identity_pair(g, p, s);
    case AugmentKind::SubstructureDrop: return substructure_drop(g, p, s, ratio, rng);
    case AugmentKind::SuperGraphSample: return super_graph_sample(g, p, s, ratio, rng);
    case AugmentKind::SubstructureSubstitute:
      return substructure_substitute(g, p, s, class_pool, ratio, rng);
  }
  throw std::logic_error("apply_augment: unreachable");
}

std::pair<AugmentedPair, AugmentedPair> sample_view_pair(const Graph& g, const Partition& p,
                                                         const SuperGraph& s,
                                                         std::span<const Fragment> class_pool,
                                                         double ratio, Rng& rng) {
  const AugmentKind t0 = draw_augment_kind(rng);
  const AugmentKind t1 = draw_augment_kind(rng);
  AugmentedPair v0 = apply_augment(t0, g, p, s, class_pool, ratio, rng);
  AugmentedPair v1 = apply_augment(t1, g, p, s, class_pool, ratio, rng);
  return {std::move(v0), std::move(v1)};
}

}  // namespace sgood
