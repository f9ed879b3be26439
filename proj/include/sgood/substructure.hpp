#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sgood/graph.hpp"

namespace sgood {

// Node -> substructure assignment. Detector outputs are total functions onto
// [0, count) with connected parts; hand-built partitions may carry -1 or
// out-of-range ids, which validate_partition reports.
struct Partition {
  std::vector<int> assignment;
  int count = 0;

  std::vector<std::vector<int>> members() const;

  bool operator==(const Partition&) const = default;
};

// Graph over substructures: one node per substructure, a cross edge (j, k)
// whenever some original edge joins substructures j and k, and one self loop
// per node. Self loops are implicit; edges holds cross edges only (u < v).
struct SuperGraph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;

  // Cross-edge degree, self loops excluded.
  std::vector<int> degrees() const;

  bool operator==(const SuperGraph&) const = default;
};

// Newman modularity Q = sum_c (e_c / m - (d_c / 2m)^2). Throws on an
// edgeless graph.
double modularity(const Graph& g, const Partition& p);

// Greedy agglomerative modularity maximization: start from singletons and
// repeatedly merge the adjacent community pair with the largest dQ while
// dQ > 0, ties broken by the smallest (id, id) pair where a community id is
// its smallest member node. Only adjacent pairs merge, so parts stay
// connected; isolated nodes end up as singletons.
Partition detect_substructures_modularity(const Graph& g);

// Asynchronous label propagation with seeded sweep order, ties broken by the
// smallest label; a post-pass splits disconnected label classes into
// connected components.
Partition detect_substructures_lp(const Graph& g, std::uint64_t seed);

enum class PartitionProperty { NonOverlapping = 1, Covering = 2, Connected = 3 };

struct PartitionViolation {
  PartitionProperty property;
  int substructure;  // -1 when not tied to one substructure

  bool operator==(const PartitionViolation&) const = default;
};

std::vector<PartitionViolation> validate_partition(const Graph& g, const Partition& p);

// Throws std::invalid_argument when the partition is invalid.
SuperGraph build_super_graph(const Graph& g, const Partition& p);

// Hash of a substructure's canonical summary: node count, sorted degree
// sequence and a 3-round WL histogram hash seeded by discrete node labels
// when present, else by degrees. Continuous attributes are ignored.
using Fingerprint = std::uint64_t;
Fingerprint substructure_fingerprint(const Graph& g, const Partition& p, int id);

// Fraction of OOD graphs containing at least one substructure whose
// fingerprint never occurs among the ID substructures.
double novelty_rate(std::span<const Graph> id_graphs, std::span<const Partition> id_partitions,
                    std::span<const Graph> ood_graphs, std::span<const Partition> ood_partitions);

}  // namespace sgood
