#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgood/graph.hpp"

namespace sgood {

enum class MotifKind { Triangle, Square, Pentagon };

MotifKind motif_from_string(const std::string& name);
std::string motif_to_string(MotifKind kind);

// Motif-stitched generator: every graph is a chain of identical cycle motifs
// joined by bridge edges between uniformly chosen endpoints, so graphs are
// always connected. ID families differ only in motif type; the OOD family
// uses its own motif.
struct SyntheticSpec {
  std::vector<MotifKind> id_family_motifs = {MotifKind::Triangle, MotifKind::Pentagon};
  MotifKind ood_motif = MotifKind::Square;
  int graphs_per_family = 250;
  int ood_graphs = 100;
  int motifs_per_graph = 3;
  int bridge_edges = 1;

  enum class FeatureScheme {
    None,              // no attribute files; ingestion falls back to degree one-hot
    DegreeAttributes,  // degree one-hots written as node attributes
  };
  FeatureScheme features = FeatureScheme::None;

  std::uint64_t seed = 1;
};

struct SyntheticData {
  GraphDataset id;
  GraphDataset ood;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace sgood
