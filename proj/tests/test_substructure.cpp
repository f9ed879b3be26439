#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "sgood/substructure.hpp"
#include "test_util.hpp"

using namespace sgood;

namespace {

std::set<std::set<int>> group_sets(const Partition& p) {
  std::set<std::set<int>> out;
  for (const auto& m : p.members()) out.insert(std::set<int>(m.begin(), m.end()));
  return out;
}

}  // namespace

TEST_CASE("modularity on hand cases") {
  SUBCASE("K3 as one community is zero") {
    const Graph g = test::complete_graph(3);
    const Partition p = test::partition_from_assignment({0, 0, 0});
    CHECK(modularity(g, p) == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("two disjoint triangles split by component") {
    const Graph g = disjoint_union(test::complete_graph(3), test::complete_graph(3));
    const Partition p = test::partition_from_assignment({0, 0, 0, 1, 1, 1});
    CHECK(modularity(g, p) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("all singletons equals minus sum of squared degree fractions") {
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
      Graph g = test::random_fuzz_graph(rng);
      if (g.edges.empty()) continue;
      std::vector<int> assignment(g.node_count);
      for (int v = 0; v < g.node_count; ++v) assignment[v] = v;
      const Partition p = test::partition_from_assignment(assignment);
      const double m = static_cast<double>(g.edges.size());
      double expected = 0.0;
      for (const int d : g.degrees()) expected -= (d / (2.0 * m)) * (d / (2.0 * m));
      CHECK(modularity(g, p) == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  SUBCASE("edgeless graph is an error") {
    const Graph g = make_graph(2, {});
    CHECK_THROWS(modularity(g, test::partition_from_assignment({0, 1})));
  }
}

TEST_CASE("detect_substructures_modularity hand cases") {
  SUBCASE("K3 collapses to one substructure") {
    const Partition p = detect_substructures_modularity(test::complete_graph(3));
    CHECK(p.count == 1);
  }

  SUBCASE("two disjoint triangles stay separate") {
    const Graph g = disjoint_union(test::complete_graph(3), test::complete_graph(3));
    const Partition p = detect_substructures_modularity(g);
    CHECK(p.count == 2);
    CHECK(group_sets(p) == std::set<std::set<int>>{{0, 1, 2}, {3, 4, 5}});
  }

  SUBCASE("barbell splits into the two cliques, matching brute force") {
    const Graph g = test::barbell_graph(4);
    const Partition p = detect_substructures_modularity(g);
    CHECK(group_sets(p) == std::set<std::set<int>>{{0, 1, 2, 3}, {4, 5, 6, 7}});

    // brute-force max modularity over all 4140 partitions of 8 nodes
    double best_q = -2.0;
    std::vector<int> best;
    for (const auto& assignment : test::all_set_partitions(8)) {
      const double q = modularity(g, test::partition_from_assignment(assignment));
      if (q > best_q) {
        best_q = q;
        best = assignment;
      }
    }
    CHECK(group_sets(test::partition_from_assignment(best)) == group_sets(p));
    CHECK(modularity(g, p) == doctest::Approx(best_q).epsilon(1e-12));
  }

  SUBCASE("single node graph") {
    const Partition p = detect_substructures_modularity(make_graph(1, {}));
    CHECK(p.count == 1);
  }
}

TEST_CASE("detect_substructures_lp hand cases") {
  SUBCASE("two disjoint triangles") {
    const Graph g = disjoint_union(test::complete_graph(3), test::complete_graph(3));
    const Partition p = detect_substructures_lp(g, 5);
    CHECK(p.count == 2);
  }

  SUBCASE("K3 reaches unanimity") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Partition p = detect_substructures_lp(test::complete_graph(3), seed);
      CHECK(p.count == 1);
    }
  }

  SUBCASE("star classes come out connected") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Graph g = test::star_graph(4);
      const Partition p = detect_substructures_lp(g, seed);
      CHECK(validate_partition(g, p).empty());
    }
  }
}

TEST_CASE("validate_partition") {
  const Graph p4 = test::path_graph(4);

  SUBCASE("detector output is ok") {
    CHECK(validate_partition(p4, detect_substructures_modularity(p4)).empty());
  }

  SUBCASE("disconnected substructure violates property iii") {
    // nodes 0 and 3 are not adjacent in the path
    const Partition p = test::partition_from_assignment({0, 1, 1, 0});
    const auto violations = validate_partition(p4, p);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].property == PartitionProperty::Connected);
    CHECK(violations[0].substructure == 0);
  }

  SUBCASE("missing node violates property ii") {
    Partition p = test::partition_from_assignment({0, 0, 0, 0});
    p.assignment[2] = -1;
    const auto violations = validate_partition(p4, p);
    REQUIRE_FALSE(violations.empty());
    CHECK(violations[0].property == PartitionProperty::Covering);
  }
}

TEST_CASE("build_super_graph hand cases") {
  SUBCASE("single substructure has no cross edges") {
    const Graph g = test::complete_graph(3);
    const SuperGraph s = build_super_graph(g, test::partition_from_assignment({0, 0, 0}));
    CHECK(s.node_count == 1);
    CHECK(s.edges.empty());
  }

  SUBCASE("two substructures joined by several edges give one super edge") {
    // two triangles joined by two parallel cross edges
    Graph g = make_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {0, 3}, {1, 4}});
    const SuperGraph s = build_super_graph(g, test::partition_from_assignment({0, 0, 0, 1, 1, 1}));
    CHECK(s.node_count == 2);
    CHECK(s.edges == std::vector<std::pair<int, int>>{{0, 1}});
  }

  SUBCASE("invalid partition rejected") {
    const Graph g = test::path_graph(4);
    CHECK_THROWS(build_super_graph(g, test::partition_from_assignment({0, 1, 1, 0})));
  }
}

TEST_CASE("build_super_graph equals the brute-force edge scan on fuzz graphs") {
  Rng rng(2024);
  for (int i = 0; i < 500; ++i) {
    const Graph g = test::random_fuzz_graph(rng, 12);
    const Partition p = detect_substructures_modularity(g);
    const SuperGraph s = build_super_graph(g, p);
    const auto expected = test::super_edges_oracle(g, p);
    CHECK(std::set<std::pair<int, int>>(s.edges.begin(), s.edges.end()) == expected);
  }
}

TEST_CASE("detectors emit valid partitions on fuzz graphs") {
  Rng rng(515);
  for (int i = 0; i < 500; ++i) {
    const Graph g = test::random_fuzz_graph(rng);
    const Partition cnm = detect_substructures_modularity(g);
    CHECK(validate_partition(g, cnm).empty());
    const Partition lp = detect_substructures_lp(g, rng.next_u64());
    CHECK(validate_partition(g, lp).empty());

    if (!g.edges.empty()) {
      // CNM beats both trivial partitions
      std::vector<int> singletons(g.node_count);
      for (int v = 0; v < g.node_count; ++v) singletons[v] = v;
      const double q = modularity(g, cnm);
      CHECK(q >= modularity(g, test::partition_from_assignment(singletons)) - 1e-12);
      CHECK(q >= modularity(g, test::partition_from_assignment(
                                   std::vector<int>(g.node_count, 0))) -
                     1e-12);
    }
  }
}

TEST_CASE("substructure_fingerprint") {
  SUBCASE("label-free triangles in different graphs match") {
    const Graph a = disjoint_union(test::complete_graph(3), test::path_graph(2));
    const Graph b = disjoint_union(test::path_graph(4), test::complete_graph(3));
    const Partition pa = test::partition_from_assignment({0, 0, 0, 1, 1});
    const Partition pb = test::partition_from_assignment({0, 0, 0, 0, 1, 1, 1});
    CHECK(substructure_fingerprint(a, pa, 0) == substructure_fingerprint(b, pb, 1));
  }

  SUBCASE("triangle vs path of 3 differ") {
    const Graph a = test::complete_graph(3);
    const Graph b = test::path_graph(3);
    const Partition whole3 = test::partition_from_assignment({0, 0, 0});
    CHECK(substructure_fingerprint(a, whole3, 0) != substructure_fingerprint(b, whole3, 0));
  }

  SUBCASE("node labels participate") {
    Graph a = test::complete_graph(3);
    a.node_labels = {1, 1, 1};
    Graph b = test::complete_graph(3);
    b.node_labels = {1, 1, 2};
    const Partition whole3 = test::partition_from_assignment({0, 0, 0});
    CHECK(substructure_fingerprint(a, whole3, 0) != substructure_fingerprint(b, whole3, 0));
  }

  SUBCASE("invariant under relabeling, 200 trials") {
    Rng rng(909);
    for (int i = 0; i < 200; ++i) {
      Graph g = test::random_fuzz_graph(rng);
      if (rng.uniform(2) == 0) {
        g.node_labels.resize(g.node_count);
        for (auto& l : g.node_labels) l = static_cast<int>(rng.uniform(3));
      }
      const Partition p = detect_substructures_modularity(g);
      const auto perm = test::random_permutation(g.node_count, rng);
      const Graph pg = test::permute_graph(g, perm);
      Partition pp;
      pp.count = p.count;
      pp.assignment.resize(p.assignment.size());
      for (int v = 0; v < g.node_count; ++v) pp.assignment[perm[v]] = p.assignment[v];
      for (int id = 0; id < p.count; ++id) {
        CHECK(substructure_fingerprint(g, p, id) == substructure_fingerprint(pg, pp, id));
      }
    }
  }
}

TEST_CASE("novelty_rate") {
  const Graph tri = test::complete_graph(3);
  const Graph square = cycle_graph(4);
  const Partition whole3 = test::partition_from_assignment({0, 0, 0});
  const Partition whole4 = test::partition_from_assignment({0, 0, 0, 0});

  SUBCASE("identical sets have zero novelty") {
    const std::vector<Graph> id{tri, tri};
    const std::vector<Partition> idp{whole3, whole3};
    CHECK(novelty_rate(id, idp, id, idp) == 0.0);
  }

  SUBCASE("all-square OOD against all-triangle ID is fully novel") {
    const std::vector<Graph> id{tri, tri};
    const std::vector<Partition> idp{whole3, whole3};
    const std::vector<Graph> ood{square, square, square};
    const std::vector<Partition> oodp{whole4, whole4, whole4};
    CHECK(novelty_rate(id, idp, ood, oodp) == 1.0);
  }

  SUBCASE("mixed OOD counts graphs with at least one unseen substructure") {
    const Graph both = disjoint_union(tri, square);
    const Partition pboth = test::partition_from_assignment({0, 0, 0, 1, 1, 1, 1});
    const std::vector<Graph> id{tri};
    const std::vector<Partition> idp{whole3};
    const std::vector<Graph> ood{both, tri};
    const std::vector<Partition> oodp{pboth, whole3};
    CHECK(novelty_rate(id, idp, ood, oodp) == doctest::Approx(0.5));
  }

  SUBCASE("empty ID set is an error") {
    const std::vector<Graph> none;
    const std::vector<Partition> nonep;
    const std::vector<Graph> ood{tri};
    const std::vector<Partition> oodp{whole3};
    CHECK_THROWS(novelty_rate(none, nonep, ood, oodp));
  }
}
