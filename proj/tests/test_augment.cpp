#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <set>

#include "sgood/augment.hpp"
#include "test_util.hpp"

using namespace sgood;

namespace {

// Chain of k triangles, one bridge edge between consecutive motifs; the
// partition puts each triangle in its own substructure.
struct TriangleChain {
  Graph graph;
  Partition partition;
  SuperGraph super;
};

TriangleChain triangle_chain(int k) {
  std::vector<std::pair<int, int>> edges;
  std::vector<int> assignment;
  for (int m = 0; m < k; ++m) {
    const int off = 3 * m;
    edges.emplace_back(off, off + 1);
    edges.emplace_back(off + 1, off + 2);
    edges.emplace_back(off, off + 2);
    if (m > 0) edges.emplace_back(off - 1, off);
    for (int i = 0; i < 3; ++i) assignment.push_back(m);
  }
  TriangleChain out;
  out.graph = make_graph(3 * k, std::move(edges));
  test::give_constant_features(out.graph, 2);
  out.graph.label = 0;
  out.partition = test::partition_from_assignment(assignment);
  out.super = build_super_graph(out.graph, out.partition);
  return out;
}

std::multiset<std::vector<double>> feature_rows(const Graph& g) {
  std::multiset<std::vector<double>> rows;
  for (int v = 0; v < g.node_count; ++v) {
    const auto row = g.feature_row(v);
    rows.insert(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

void check_pair_consistent(const AugmentedPair& pair) {
  CHECK(validate_partition(pair.graph, pair.partition).empty());
  const auto expected = test::super_edges_oracle(pair.graph, pair.partition);
  CHECK(std::set<std::pair<int, int>>(pair.super_graph.edges.begin(),
                                      pair.super_graph.edges.end()) == expected);
  CHECK(pair.super_graph.node_count == pair.partition.count);
}

}  // namespace

TEST_CASE("substructure_drop") {
  SUBCASE("drops floor(ratio * n) substructures") {
    const TriangleChain c = triangle_chain(10);
    Rng rng(1);
    const AugmentedPair out = substructure_drop(c.graph, c.partition, c.super, 0.3, rng);
    CHECK(out.partition.count == 7);
    CHECK(out.graph.node_count == 21);
    check_pair_consistent(out);
  }

  SUBCASE("single substructure survives any ratio") {
    const TriangleChain c = triangle_chain(1);
    Rng rng(2);
    const AugmentedPair out = substructure_drop(c.graph, c.partition, c.super, 0.9, rng);
    CHECK(out.graph == c.graph);
    CHECK(out.partition.count == 1);
  }

  SUBCASE("n=3 at ratio 0.3 is the identity") {
    const TriangleChain c = triangle_chain(3);
    Rng rng(3);
    const AugmentedPair out = substructure_drop(c.graph, c.partition, c.super, 0.3, rng);
    CHECK(out.graph == c.graph);
  }

  SUBCASE("never empties the graph") {
    const TriangleChain c = triangle_chain(4);
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
      const AugmentedPair out = substructure_drop(c.graph, c.partition, c.super, 0.99, rng);
      CHECK(out.partition.count >= 1);
      CHECK(out.graph.node_count >= 1);
    }
  }
}

TEST_CASE("super_graph_sample") {
  SUBCASE("keeps ceil((1-ratio) n) substructures") {
    const TriangleChain c = triangle_chain(10);
    Rng rng(5);
    const AugmentedPair out = super_graph_sample(c.graph, c.partition, c.super, 0.3, rng);
    CHECK(out.partition.count == 7);
    check_pair_consistent(out);
  }

  SUBCASE("single substructure is identity") {
    const TriangleChain c = triangle_chain(1);
    Rng rng(6);
    const AugmentedPair out = super_graph_sample(c.graph, c.partition, c.super, 0.3, rng);
    CHECK(out.graph == c.graph);
  }

  SUBCASE("connected super graph keeps a connected sample") {
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
      const TriangleChain c = triangle_chain(2 + static_cast<int>(rng.uniform(8)));
      const AugmentedPair out = super_graph_sample(c.graph, c.partition, c.super, 0.4, rng);
      // the kept substructures of a chain must form one connected block
      const auto violations = validate_partition(out.graph, out.partition);
      CHECK(violations.empty());
      std::vector<std::vector<int>> adj(out.super_graph.node_count);
      for (const auto& [a, b] : out.super_graph.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
      }
      std::vector<char> seen(out.super_graph.node_count, 0);
      std::vector<int> stack{0};
      seen[0] = 1;
      int visited = 0;
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        ++visited;
        for (const int u : adj[v]) {
          if (!seen[u]) {
            seen[u] = 1;
            stack.push_back(u);
          }
        }
      }
      CHECK(visited == out.super_graph.node_count);
    }
  }
}

TEST_CASE("substructure_substitute") {
  const TriangleChain chain3 = triangle_chain(3);
  std::vector<Fragment> pool;
  // a 4-cycle fragment with matching feature width
  Graph square = cycle_graph(4);
  test::give_constant_features(square, 2);
  pool.push_back(extract_fragment(square, test::partition_from_assignment({0, 0, 0, 0}), 0));

  SUBCASE("no degree-one super nodes means identity") {
    // triangle of triangles: every super node has degree 2
    Graph g = make_graph(9, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {6, 7}, {7, 8},
                             {6, 8}, {2, 3}, {5, 6}, {8, 0}});
    test::give_constant_features(g, 2);
    const Partition p = test::partition_from_assignment({0, 0, 0, 1, 1, 1, 2, 2, 2});
    const SuperGraph s = build_super_graph(g, p);
    Rng rng(8);
    const AugmentedPair out = substructure_substitute(g, p, s, pool, 0.9, rng);
    CHECK(out.graph == g);
    CHECK_FALSE(out.pool_was_empty);
  }

  SUBCASE("path of three super nodes: only the endpoints are candidates") {
    Rng rng(9);
    // ratio 1.0 -> both endpoints replaced by the square fragment
    const AugmentedPair out =
        substructure_substitute(chain3.graph, chain3.partition, chain3.super, pool, 1.0, rng);
    CHECK(out.partition.count == 3);
    CHECK(out.graph.node_count == 3 + 4 + 4);  // middle triangle + two squares
    check_pair_consistent(out);
    // the middle substructure is untouched: still 3 members
    const auto members = out.partition.members();
    const std::multiset<std::size_t> sizes{members[0].size(), members[1].size(),
                                           members[2].size()};
    CHECK(sizes == std::multiset<std::size_t>{3, 4, 4});
  }

  SUBCASE("ratio 0.5 of two candidates replaces exactly one") {
    Rng rng(10);
    const AugmentedPair out =
        substructure_substitute(chain3.graph, chain3.partition, chain3.super, pool, 0.5, rng);
    CHECK(out.graph.node_count == 3 + 3 + 4);
    check_pair_consistent(out);
  }

  SUBCASE("empty pool falls back to identity with a warning") {
    Rng rng(11);
    const AugmentedPair out = substructure_substitute(chain3.graph, chain3.partition,
                                                      chain3.super, {}, 1.0, rng);
    CHECK(out.graph == chain3.graph);
    CHECK(out.pool_was_empty);
  }

  SUBCASE("fuzz: substituted pairs stay valid and Definition-consistent") {
    Rng rng(12);
    int done = 0;
    while (done < 200) {
      Graph g = test::random_fuzz_graph(rng, 10);
      test::give_constant_features(g, 2);
      const Partition p = detect_substructures_modularity(g);
      const SuperGraph s = build_super_graph(g, p);
      std::vector<Fragment> fuzz_pool;
      for (int id = 0; id < p.count; ++id) fuzz_pool.push_back(extract_fragment(g, p, id));
      const AugmentedPair out = substructure_substitute(g, p, s, fuzz_pool, 0.7, rng);
      check_pair_consistent(out);
      ++done;
    }
  }
}

TEST_CASE("sample_view_pair") {
  const TriangleChain c = triangle_chain(4);
  std::vector<Fragment> pool;
  pool.push_back(extract_fragment(c.graph, c.partition, 0));

  SUBCASE("deterministic given the seed") {
    Rng rng1(13);
    Rng rng2(13);
    const auto [a0, a1] = sample_view_pair(c.graph, c.partition, c.super, pool, 0.3, rng1);
    const auto [b0, b1] = sample_view_pair(c.graph, c.partition, c.super, pool, 0.3, rng2);
    CHECK(a0.graph == b0.graph);
    CHECK(a1.graph == b1.graph);
  }

  SUBCASE("views are valid pairs") {
    Rng rng(14);
    for (int i = 0; i < 100; ++i) {
      const auto [v0, v1] = sample_view_pair(c.graph, c.partition, c.super, pool, 0.3, rng);
      check_pair_consistent(v0);
      check_pair_consistent(v1);
    }
  }

  SUBCASE("kind frequencies are uniform") {
    Rng rng(15);
    std::map<AugmentKind, int> counts;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) ++counts[draw_augment_kind(rng)];
    for (const auto& [kind, count] : counts) {
      CHECK(static_cast<double>(count) / draws == doctest::Approx(0.25).epsilon(0.08));
    }
    CHECK(counts.size() == 4);
  }
}

TEST_CASE("augmentation invariants on fuzz graphs") {
  Rng rng(16);
  int done = 0;
  while (done < 200) {
    Graph g = test::random_fuzz_graph(rng, 10);
    test::give_random_features(g, 2, rng);
    const Partition p = detect_substructures_modularity(g);
    const SuperGraph s = build_super_graph(g, p);

    const AugmentedPair dropped = substructure_drop(g, p, s, 0.4, rng);
    check_pair_consistent(dropped);
    CHECK(dropped.graph.node_count >= 1);

    const AugmentedPair sampled = super_graph_sample(g, p, s, 0.4, rng);
    check_pair_consistent(sampled);
    CHECK(sampled.graph.node_count >= 1);

    // feature rows of kept nodes are a sub-multiset of the originals
    const auto original_rows = feature_rows(g);
    for (const auto* pair : {&dropped, &sampled}) {
      auto remaining = original_rows;
      bool ok = true;
      for (int v = 0; v < pair->graph.node_count; ++v) {
        const auto row = pair->graph.feature_row(v);
        const auto it = remaining.find(std::vector<double>(row.begin(), row.end()));
        if (it == remaining.end()) {
          ok = false;
          break;
        }
        remaining.erase(it);
      }
      CHECK(ok);
    }
    ++done;
  }
}
