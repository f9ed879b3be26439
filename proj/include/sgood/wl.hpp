#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sgood/graph.hpp"

namespace sgood {

// Result of 1-WL color refinement. Colors are 64-bit hashes that are stable
// across graphs, so histograms of two graphs are directly comparable.
struct WLColoring {
  std::vector<std::uint64_t> colors;                    // final per-node colors
  std::vector<std::pair<std::uint64_t, int>> histogram; // sorted (color, count)
  std::uint64_t hash = 0;                               // hash of the final histogram
  std::vector<std::uint64_t> round_hashes;              // histogram hash per round 0..k
};

// Standard 1-WL: each round recolors a node by (own color, sorted multiset of
// neighbor colors). Initial colors come from node labels when
// use_node_labels is set and labels exist, otherwise all nodes start equal.
WLColoring wl_refine(const Graph& g, int iterations, bool use_node_labels);

// Same refinement from caller-provided initial colors (one per node).
WLColoring wl_refine(const Graph& g, int iterations, std::span<const std::uint64_t> init);

// True iff the node counts differ or the color histograms differ at any
// round <= iterations (uniform initial colors).
bool wl_distinguishable(const Graph& a, const Graph& b, int iterations);

}  // namespace sgood
