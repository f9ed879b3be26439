#include "sgood/substructure.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "sgood/rng.hpp"
#include "sgood/wl.hpp"

namespace sgood {

namespace {

// Connected components of the subgraph induced by `nodes`.
std::vector<std::vector<int>> induced_components(const std::vector<std::vector<int>>& adj,
                                                 const std::vector<int>& nodes,
                                                 const std::vector<char>& in_set) {
  std::vector<std::vector<int>> comps;
  std::vector<char> seen(in_set.size(), 0);
  for (const int start : nodes) {
    if (seen[start]) continue;
    comps.emplace_back();
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      comps.back().push_back(v);
      for (const int u : adj[v]) {
        if (in_set[u] && !seen[u]) {
          seen[u] = 1;
          stack.push_back(u);
        }
      }
    }
  }
  return comps;
}

// Relabels groups of nodes into a Partition with ids ordered by each group's
// smallest member.
Partition partition_from_groups(int node_count, std::vector<std::vector<int>> groups) {
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end());
  });
  Partition p;
  p.count = static_cast<int>(groups.size());
  p.assignment.assign(static_cast<std::size_t>(node_count), -1);
  for (std::size_t id = 0; id < groups.size(); ++id) {
    for (const int v : groups[id]) p.assignment[v] = static_cast<int>(id);
  }
  return p;
}

}  // namespace

std::vector<std::vector<int>> Partition::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(std::max(count, 0)));
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    const int id = assignment[v];
    if (id >= 0 && id < count) out[id].push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<int> SuperGraph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(node_count), 0);
  for (const auto& [u, v] : edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

double modularity(const Graph& g, const Partition& p) {
  const double m = static_cast<double>(g.edges.size());
  if (g.edges.empty()) throw std::invalid_argument("modularity: edgeless graph");
  if (static_cast<int>(p.assignment.size()) != g.node_count) {
    throw std::invalid_argument("modularity: assignment size does not match node count");
  }
  std::vector<double> intra(static_cast<std::size_t>(p.count), 0.0);
  std::vector<double> degree(static_cast<std::size_t>(p.count), 0.0);
  for (const auto& [u, v] : g.edges) {
    const int a = p.assignment[u];
    const int b = p.assignment[v];
    if (a < 0 || a >= p.count || b < 0 || b >= p.count) {
      throw std::invalid_argument("modularity: node outside the partition");
    }
    if (a == b) intra[a] += 1.0;
    degree[a] += 1.0;
    degree[b] += 1.0;
  }
  double q = 0.0;
  for (int c = 0; c < p.count; ++c) {
    const double frac = degree[c] / (2.0 * m);
    q += intra[c] / m - frac * frac;
  }
  return q;
}

Partition detect_substructures_modularity(const Graph& g) {
  if (g.node_count < 1) throw std::invalid_argument("detect_substructures_modularity: empty graph");
  const double m = static_cast<double>(g.edges.size());

  // Community id = smallest member node. Only adjacent pairs are candidates.
  struct Community {
    double degree = 0.0;
    std::map<int, double> nbr;  // neighbor community id -> cross edge count
    std::vector<int> nodes;
  };
  std::map<int, Community> comms;
  for (int v = 0; v < g.node_count; ++v) {
    comms[v].nodes = {v};
  }
  for (const auto& [u, v] : g.edges) {
    comms[u].degree += 1.0;
    comms[v].degree += 1.0;
    comms[u].nbr[v] += 1.0;
    comms[v].nbr[u] += 1.0;
  }

  if (m > 0) {
    for (;;) {
      double best_dq = 0.0;
      std::pair<int, int> best_pair{-1, -1};
      bool found = false;
      for (const auto& [ida, ca] : comms) {
        for (const auto& [idb, e_ab] : ca.nbr) {
          if (idb <= ida) continue;
          const double dq = e_ab / m - ca.degree * comms.at(idb).degree / (2.0 * m * m);
          const std::pair<int, int> key{ida, idb};
          if (dq > 0.0 && (!found || dq > best_dq || (dq == best_dq && key < best_pair))) {
            best_dq = dq;
            best_pair = key;
            found = true;
          }
        }
      }
      if (!found) break;

      const auto [a, b] = best_pair;
      Community& ca = comms.at(a);
      Community merged = std::move(comms.at(b));
      ca.degree += merged.degree;
      ca.nodes.insert(ca.nodes.end(), merged.nodes.begin(), merged.nodes.end());
      ca.nbr.erase(b);
      for (const auto& [x, e] : merged.nbr) {
        if (x == a) continue;
        ca.nbr[x] += e;
        Community& cx = comms.at(x);
        cx.nbr.erase(b);
        cx.nbr[a] += e;
      }
      comms.erase(b);
    }
  }

  std::vector<std::vector<int>> groups;
  groups.reserve(comms.size());
  for (auto& [id, c] : comms) groups.push_back(std::move(c.nodes));
  return partition_from_groups(g.node_count, std::move(groups));
}

Partition detect_substructures_lp(const Graph& g, std::uint64_t seed) {
  if (g.node_count < 1) throw std::invalid_argument("detect_substructures_lp: empty graph");
  const auto adj = g.adjacency();
  std::vector<int> label(static_cast<std::size_t>(g.node_count));
  std::iota(label.begin(), label.end(), 0);
  std::vector<int> order = label;

  Rng rng(derive_seed(seed, "lp"));
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    rng.shuffle(order);
    bool changed = false;
    for (const int v : order) {
      if (adj[v].empty()) continue;
      std::map<int, int> counts;
      for (const int u : adj[v]) ++counts[label[u]];
      int best = label[v];
      int best_count = 0;
      for (const auto& [lab, cnt] : counts) {  // map order: smallest label wins ties
        if (cnt > best_count) {
          best = lab;
          best_count = cnt;
        }
      }
      if (best != label[v]) {
        label[v] = best;
        changed = true;
      }
    }
    if (!changed) break;
  }

  // split any disconnected label class into connected components
  std::map<int, std::vector<int>> classes;
  for (int v = 0; v < g.node_count; ++v) classes[label[v]].push_back(v);
  std::vector<std::vector<int>> groups;
  std::vector<char> in_set(static_cast<std::size_t>(g.node_count), 0);
  for (const auto& [lab, nodes] : classes) {
    for (const int v : nodes) in_set[v] = 1;
    for (auto& comp : induced_components(adj, nodes, in_set)) groups.push_back(std::move(comp));
    for (const int v : nodes) in_set[v] = 0;
  }
  return partition_from_groups(g.node_count, std::move(groups));
}

std::vector<PartitionViolation> validate_partition(const Graph& g, const Partition& p) {
  std::vector<PartitionViolation> violations;
  bool covering = true;
  for (int v = 0; v < g.node_count; ++v) {
    const int id = v < static_cast<int>(p.assignment.size()) ? p.assignment[v] : -1;
    if (id < 0 || id >= p.count) covering = false;
  }
  if (!covering) violations.push_back({PartitionProperty::Covering, -1});

  const auto groups = p.members();
  const auto adj = g.adjacency();
  std::vector<char> in_set(static_cast<std::size_t>(g.node_count), 0);
  for (int id = 0; id < p.count; ++id) {
    const auto& nodes = groups[id];
    if (nodes.empty()) {
      violations.push_back({PartitionProperty::Connected, id});
      continue;
    }
    for (const int v : nodes) in_set[v] = 1;
    const auto comps = induced_components(adj, nodes, in_set);
    for (const int v : nodes) in_set[v] = 0;
    if (comps.size() != 1) violations.push_back({PartitionProperty::Connected, id});
  }
  return violations;
}

SuperGraph build_super_graph(const Graph& g, const Partition& p) {
  if (!validate_partition(g, p).empty()) {
    throw std::invalid_argument("build_super_graph: invalid partition");
  }
  std::set<std::pair<int, int>> cross;
  for (const auto& [u, v] : g.edges) {
    const int a = p.assignment[u];
    const int b = p.assignment[v];
    if (a != b) cross.emplace(std::min(a, b), std::max(a, b));
  }
  SuperGraph s;
  s.node_count = p.count;
  s.edges.assign(cross.begin(), cross.end());
  return s;
}

Fingerprint substructure_fingerprint(const Graph& g, const Partition& p, int id) {
  if (id < 0 || id >= p.count) {
    throw std::invalid_argument("substructure_fingerprint: id out of range");
  }
  const auto groups = p.members();
  const auto& nodes = groups[id];

  std::vector<int> local(static_cast<std::size_t>(g.node_count), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<int>(i);
  std::vector<std::pair<int, int>> edges;
  for (const auto& [u, v] : g.edges) {
    if (local[u] >= 0 && local[v] >= 0) edges.emplace_back(local[u], local[v]);
  }
  Graph sub = make_graph(static_cast<int>(nodes.size()), std::move(edges));

  std::vector<std::uint64_t> init(nodes.size());
  const auto deg = sub.degrees();
  const bool labeled = !g.node_labels.empty();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    init[i] = labeled ? hash_combine(hash64(0xA1), static_cast<std::uint64_t>(g.node_labels[nodes[i]]))
                      : hash_combine(hash64(0xB2), static_cast<std::uint64_t>(deg[i]));
  }
  const WLColoring wl = wl_refine(sub, 3, init);

  std::vector<int> sorted_deg = deg;
  std::sort(sorted_deg.begin(), sorted_deg.end());
  std::uint64_t h = hash64(static_cast<std::uint64_t>(sub.node_count));
  for (const int d : sorted_deg) h = hash_combine(h, static_cast<std::uint64_t>(d));
  return hash_combine(h, wl.hash);
}

double novelty_rate(std::span<const Graph> id_graphs, std::span<const Partition> id_partitions,
                    std::span<const Graph> ood_graphs,
                    std::span<const Partition> ood_partitions) {
  if (id_graphs.empty()) throw std::invalid_argument("novelty_rate: empty ID set");
  if (id_graphs.size() != id_partitions.size() || ood_graphs.size() != ood_partitions.size()) {
    throw std::invalid_argument("novelty_rate: graph/partition count mismatch");
  }
  std::unordered_set<Fingerprint> seen;
  for (std::size_t i = 0; i < id_graphs.size(); ++i) {
    for (int id = 0; id < id_partitions[i].count; ++id) {
      seen.insert(substructure_fingerprint(id_graphs[i], id_partitions[i], id));
    }
  }
  if (ood_graphs.empty()) return 0.0;
  int novel = 0;
  for (std::size_t i = 0; i < ood_graphs.size(); ++i) {
    for (int id = 0; id < ood_partitions[i].count; ++id) {
      if (!seen.contains(substructure_fingerprint(ood_graphs[i], ood_partitions[i], id))) {
        ++novel;
        break;
      }
    }
  }
  return static_cast<double>(novel) / static_cast<double>(ood_graphs.size());
}

}  // namespace sgood
