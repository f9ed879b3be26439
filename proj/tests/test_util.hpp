#pragma once

// Shared fixtures and independent oracles for the test suites. Everything in
// here must stay independent of the library code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "sgood/augment.hpp"
#include "sgood/encoder.hpp"
#include "sgood/graph.hpp"
#include "sgood/rng.hpp"
#include "sgood/substructure.hpp"
#include "sgood/training.hpp"

namespace sgood::test {

inline Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  }
  return make_graph(n, std::move(edges));
}

inline Graph path_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return make_graph(n, std::move(edges));
}

inline Graph star_graph(int leaves) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
  return make_graph(leaves + 1, std::move(edges));
}

// Two K_k cliques joined by a single edge.
inline Graph barbell_graph(int k) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < k; ++u) {
    for (int v = u + 1; v < k; ++v) {
      edges.emplace_back(u, v);
      edges.emplace_back(k + u, k + v);
    }
  }
  edges.emplace_back(k - 1, k);
  return make_graph(2 * k, std::move(edges));
}

inline Graph er_graph(int n, double p, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform_real() < p) edges.emplace_back(u, v);
    }
  }
  return make_graph(n, std::move(edges));
}

// Random chain of small cycle motifs with single bridge edges.
inline Graph motif_stitched_graph(Rng& rng) {
  const int motifs = 1 + static_cast<int>(rng.uniform(3));
  std::vector<std::pair<int, int>> edges;
  std::vector<int> offsets;
  int n = 0;
  for (int m = 0; m < motifs; ++m) {
    const int k = 3 + static_cast<int>(rng.uniform(3));
    offsets.push_back(n);
    for (int i = 0; i < k; ++i) edges.emplace_back(n + i, n + (i + 1) % k);
    if (m > 0) {
      const int prev = offsets[m - 1] + static_cast<int>(rng.uniform(n - offsets[m - 1]));
      edges.emplace_back(prev, n + static_cast<int>(rng.uniform(k)));
    }
    n += k;
  }
  return make_graph(n, std::move(edges));
}

inline Graph random_fuzz_graph(Rng& rng, int max_nodes = 12) {
  if (rng.uniform(2) == 0) {
    const int n = 1 + static_cast<int>(rng.uniform(max_nodes));
    return er_graph(n, rng.uniform_real(0.15, 0.6), rng);
  }
  return motif_stitched_graph(rng);
}

inline void give_constant_features(Graph& g, int width = 1) {
  g.feature_width = width;
  g.features.assign(static_cast<std::size_t>(g.node_count) * width, 1.0);
}

inline void give_random_features(Graph& g, int width, Rng& rng) {
  g.feature_width = width;
  g.features.resize(static_cast<std::size_t>(g.node_count) * width);
  for (double& v : g.features) v = rng.uniform_real(-1.0, 1.0);
}

inline Graph permute_graph(const Graph& g, const std::vector<int>& perm) {
  Graph out;
  out.node_count = g.node_count;
  out.feature_width = g.feature_width;
  out.label = g.label;
  std::vector<std::pair<int, int>> edges;
  for (const auto& [u, v] : g.edges) edges.emplace_back(perm[u], perm[v]);
  Graph shell = make_graph(g.node_count, std::move(edges));
  out.edges = std::move(shell.edges);
  if (g.feature_width > 0) {
    out.features.resize(g.features.size());
    for (int v = 0; v < g.node_count; ++v) {
      const auto row = g.feature_row(v);
      std::copy(row.begin(), row.end(),
                out.features.begin() + static_cast<std::size_t>(perm[v]) * g.feature_width);
    }
  }
  if (!g.node_labels.empty()) {
    out.node_labels.resize(g.node_labels.size());
    for (int v = 0; v < g.node_count; ++v) out.node_labels[perm[v]] = g.node_labels[v];
  }
  return out;
}

inline std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  return perm;
}

// ---- independent oracles -------------------------------------------------

// Definition-style super edge set: scan every pair of substructures against
// every edge.
inline std::set<std::pair<int, int>> super_edges_oracle(const Graph& g, const Partition& p) {
  std::set<std::pair<int, int>> out;
  for (int j = 0; j < p.count; ++j) {
    for (int k = j + 1; k < p.count; ++k) {
      bool found = false;
      for (const auto& [u, v] : g.edges) {
        const int a = p.assignment[u];
        const int b = p.assignment[v];
        if ((a == j && b == k) || (a == k && b == j)) {
          found = true;
          break;
        }
      }
      if (found) out.emplace(j, k);
    }
  }
  return out;
}

// All set partitions of {0..n-1} via restricted growth strings in
// lexicographic order.
inline std::vector<std::vector<int>> all_set_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  for (;;) {
    out.push_back(a);
    int i = n - 1;
    for (; i > 0; --i) {
      int prefix_max = 0;
      for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, a[j]);
      if (a[i] <= prefix_max) break;  // a[i] may grow to at most prefix_max + 1
    }
    if (i == 0) break;
    ++a[i];
    for (int j = i + 1; j < n; ++j) a[j] = 0;
  }
  return out;
}

inline Partition partition_from_assignment(std::vector<int> assignment) {
  Partition p;
  p.count = assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
  p.assignment = std::move(assignment);
  return p;
}

// Literal double-loop evaluation of the two-view contrastive loss.
inline double ntxent_oracle(const Tensor& u0, const Tensor& u1, double tau) {
  const int b = u0.rows;
  const auto sim = [&](int vi, int i, int vj, int j) {
    const Tensor& a = vi == 0 ? u0 : u1;
    const Tensor& c = vj == 0 ? u0 : u1;
    double s = 0.0;
    for (int k = 0; k < a.cols; ++k) s += a.at(i, k) * c.at(j, k);
    return s;
  };
  double loss = 0.0;
  for (int i = 0; i < b; ++i) {
    for (int a = 0; a < 2; ++a) {
      const double pos = std::exp(sim(a, i, 1 - a, i) / tau);
      double denom = 0.0;
      for (int j = 0; j < b; ++j) {
        if (j == i) continue;
        for (int k = 0; k < 2; ++k) denom += std::exp(sim(a, i, 1 - k, j) / tau);
      }
      loss += -std::log(pos / denom);
    }
  }
  return loss / (2.0 * b);
}

// Pair-counting AUROC with half credit on ties.
inline double auroc_oracle(const std::vector<double>& scores,
                           const std::vector<std::uint8_t>& is_ood) {
  double wins = 0.0;
  std::int64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!is_ood[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (is_ood[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / static_cast<double>(pairs);
}

// ---- shared full-pipeline loss case for gradient checks -------------------

struct FullLossCase {
  std::vector<Graph> graphs;          // 2 graphs with labels and features
  std::vector<Partition> partitions;  // clean partitions
  std::vector<SuperGraph> supers;
  std::vector<AugmentedPair> views0;
  std::vector<AugmentedPair> views1;
  std::vector<int> labels;
  EncoderConfig enc;
  double alpha = 0.1;
  double tau = 0.5;
};

inline FullLossCase make_full_loss_case(std::uint64_t seed, int hidden = 8) {
  Rng rng(seed);
  FullLossCase c;
  c.enc.hidden = hidden;
  c.enc.input_width = 3;
  c.enc.num_classes = 2;
  for (int i = 0; i < 2; ++i) {
    Graph g;
    for (int attempt = 0;; ++attempt) {
      g = random_fuzz_graph(rng, 10);
      if (g.node_count >= 2 && !g.edges.empty() && g.node_count <= 10) break;
    }
    give_random_features(g, c.enc.input_width, rng);
    g.label = i;
    c.labels.push_back(i);
    Partition p = detect_substructures_modularity(g);
    c.supers.push_back(build_super_graph(g, p));
    c.partitions.push_back(std::move(p));
    c.graphs.push_back(std::move(g));
  }
  // harvest pools from both graphs so substitution is exercised too
  std::vector<Fragment> pool;
  for (int i = 0; i < 2; ++i) {
    for (int id = 0; id < c.partitions[i].count; ++id) {
      pool.push_back(extract_fragment(c.graphs[i], c.partitions[i], id));
    }
  }
  for (int i = 0; i < 2; ++i) {
    auto [v0, v1] =
        sample_view_pair(c.graphs[i], c.partitions[i], c.supers[i], pool, 0.3, rng);
    c.views0.push_back(std::move(v0));
    c.views1.push_back(std::move(v1));
  }
  return c;
}

// Builds CE + alpha * CL for the fixed case on the given tape; param order
// follows ParamSet iteration (sorted by name).
inline NodeId build_full_loss(Tape& tape, std::span<const NodeId> param_ids,
                              const FullLossCase& c, const ParamSet& reference) {
  ParamNodes nodes;
  std::size_t i = 0;
  for (const auto& [name, tensor] : reference) nodes.ids[name] = param_ids[i++];

  std::vector<GraphRef> clean_refs;
  for (std::size_t k = 0; k < c.graphs.size(); ++k) {
    clean_refs.push_back({&c.graphs[k], &c.partitions[k], &c.supers[k]});
  }
  const SuperBatch clean = make_super_batch(clean_refs, true);
  const EncodeNodes e = encode_batch(tape, clean, nodes, c.enc);
  const NodeId ce = tape.softmax_cross_entropy(e.logits, c.labels);

  std::vector<GraphRef> refs0;
  std::vector<GraphRef> refs1;
  for (std::size_t k = 0; k < c.views0.size(); ++k) {
    refs0.push_back({&c.views0[k].graph, &c.views0[k].partition, &c.views0[k].super_graph});
    refs1.push_back({&c.views1[k].graph, &c.views1[k].partition, &c.views1[k].super_graph});
  }
  const EncodeNodes e0 = encode_batch(tape, make_super_batch(refs0, true), nodes, c.enc);
  const EncodeNodes e1 = encode_batch(tape, make_super_batch(refs1, true), nodes, c.enc);
  const NodeId u0 = project(tape, e0.h_for_heads, nodes);
  const NodeId u1 = project(tape, e1.h_for_heads, nodes);
  const NodeId cl = ntxent_loss(tape, u0, u1, c.tau);
  return tape.add(ce, tape.scale(cl, c.alpha));
}

}  // namespace sgood::test
