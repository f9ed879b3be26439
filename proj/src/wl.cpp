#include "sgood/wl.hpp"

#include <algorithm>
#include <stdexcept>

#include "sgood/rng.hpp"

namespace sgood {

namespace {

constexpr std::uint64_t kUniformColor = 0x5356474F4F443157ULL;
constexpr std::uint64_t kLabelTag = 0x11;
constexpr std::uint64_t kRoundTag = 0x22;
constexpr std::uint64_t kHistTag = 0x33;

std::vector<std::pair<std::uint64_t, int>> make_histogram(
    const std::vector<std::uint64_t>& colors) {
  std::vector<std::uint64_t> sorted = colors;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<std::uint64_t, int>> hist;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    hist.emplace_back(sorted[i], static_cast<int>(j - i));
    i = j;
  }
  return hist;
}

std::uint64_t histogram_hash(const std::vector<std::pair<std::uint64_t, int>>& hist) {
  std::uint64_t h = hash64(kHistTag);
  for (const auto& [color, count] : hist) {
    h = hash_combine(h, color);
    h = hash_combine(h, static_cast<std::uint64_t>(count));
  }
  return h;
}

}  // namespace

WLColoring wl_refine(const Graph& g, int iterations, std::span<const std::uint64_t> init) {
  if (iterations < 0) throw std::invalid_argument("wl_refine: negative iteration count");
  if (static_cast<int>(init.size()) != g.node_count) {
    throw std::invalid_argument("wl_refine: initial color count does not match node count");
  }
  WLColoring out;
  out.colors.assign(init.begin(), init.end());
  out.round_hashes.push_back(histogram_hash(make_histogram(out.colors)));

  const auto adj = g.adjacency();
  std::vector<std::uint64_t> next(out.colors.size());
  std::vector<std::uint64_t> nbr;
  for (int round = 0; round < iterations; ++round) {
    for (int v = 0; v < g.node_count; ++v) {
      nbr.clear();
      for (const int u : adj[v]) nbr.push_back(out.colors[u]);
      std::sort(nbr.begin(), nbr.end());
      std::uint64_t h = hash_combine(hash64(kRoundTag), out.colors[v]);
      for (const std::uint64_t c : nbr) h = hash_combine(h, c);
      next[v] = h;
    }
    out.colors.swap(next);
    out.round_hashes.push_back(histogram_hash(make_histogram(out.colors)));
  }

  out.histogram = make_histogram(out.colors);
  out.hash = histogram_hash(out.histogram);
  return out;
}

WLColoring wl_refine(const Graph& g, int iterations, bool use_node_labels) {
  std::vector<std::uint64_t> init(static_cast<std::size_t>(g.node_count), kUniformColor);
  if (use_node_labels && !g.node_labels.empty()) {
    for (int v = 0; v < g.node_count; ++v) {
      init[v] = hash_combine(hash64(kLabelTag),
                             static_cast<std::uint64_t>(g.node_labels[v]));
    }
  }
  return wl_refine(g, iterations, init);
}

bool wl_distinguishable(const Graph& a, const Graph& b, int iterations) {
  if (a.node_count != b.node_count) return true;
  const WLColoring ca = wl_refine(a, iterations, /*use_node_labels=*/false);
  const WLColoring cb = wl_refine(b, iterations, /*use_node_labels=*/false);
  for (std::size_t r = 0; r < ca.round_hashes.size(); ++r) {
    if (ca.round_hashes[r] != cb.round_hashes[r]) return true;
  }
  return false;
}

}  // namespace sgood
