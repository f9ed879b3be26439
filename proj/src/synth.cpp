#include "sgood/synth.hpp"

#include <numeric>
#include <set>
#include <stdexcept>

#include "sgood/rng.hpp"

namespace sgood {

namespace {

int motif_size(MotifKind kind) {
  switch (kind) {
    case MotifKind::Triangle: return 3;
    case MotifKind::Square: return 4;
    case MotifKind::Pentagon: return 5;
  }
  throw std::logic_error("motif_size: unreachable");
}

Graph make_motif_chain(MotifKind kind, int motifs, int bridge_edges, Rng& rng) {
  const int k = motif_size(kind);
  const int n = k * motifs;
  std::vector<std::pair<int, int>> edges;
  for (int m = 0; m < motifs; ++m) {
    const int off = m * k;
    for (int i = 0; i < k; ++i) edges.emplace_back(off + i, off + (i + 1) % k);
  }
  for (int m = 0; m + 1 < motifs; ++m) {
    std::set<std::pair<int, int>> used;
    int attempts = 0;
    while (static_cast<int>(used.size()) < bridge_edges && attempts < 64) {
      const int u = m * k + static_cast<int>(rng.uniform(k));
      const int v = (m + 1) * k + static_cast<int>(rng.uniform(k));
      used.emplace(u, v);
      ++attempts;
    }
    for (const auto& [u, v] : used) edges.emplace_back(u, v);
  }
  return make_graph(n, std::move(edges));
}

}  // namespace

MotifKind motif_from_string(const std::string& name) {
  if (name == "triangle") return MotifKind::Triangle;
  if (name == "square") return MotifKind::Square;
  if (name == "pentagon") return MotifKind::Pentagon;
  throw std::invalid_argument("motif_from_string: unknown motif " + name);
}

std::string motif_to_string(MotifKind kind) {
  switch (kind) {
    case MotifKind::Triangle: return "triangle";
    case MotifKind::Square: return "square";
    case MotifKind::Pentagon: return "pentagon";
  }
  throw std::logic_error("motif_to_string: unreachable");
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.id_family_motifs.empty()) {
    throw std::invalid_argument("generate_synthetic: need at least one ID family");
  }
  if (spec.motifs_per_graph < 1 || spec.graphs_per_family < 1 || spec.ood_graphs < 1 ||
      spec.bridge_edges < 1) {
    throw std::invalid_argument("generate_synthetic: counts must be positive");
  }

  SyntheticData data;
  data.id.name = "SYNTH_ID";
  data.id.num_classes = static_cast<int>(spec.id_family_motifs.size());
  data.id.original_labels.resize(static_cast<std::size_t>(data.id.num_classes));
  std::iota(data.id.original_labels.begin(), data.id.original_labels.end(), 0);

  Rng rng(derive_seed(spec.seed, "synth"));
  for (std::size_t family = 0; family < spec.id_family_motifs.size(); ++family) {
    for (int i = 0; i < spec.graphs_per_family; ++i) {
      Graph g = make_motif_chain(spec.id_family_motifs[family], spec.motifs_per_graph,
                                 spec.bridge_edges, rng);
      g.label = static_cast<int>(family);
      data.id.graphs.push_back(std::move(g));
    }
  }

  data.ood.name = "SYNTH_OOD";
  data.ood.num_classes = 1;
  data.ood.original_labels = {0};
  for (int i = 0; i < spec.ood_graphs; ++i) {
    Graph g = make_motif_chain(spec.ood_motif, spec.motifs_per_graph, spec.bridge_edges, rng);
    g.label = 0;
    data.ood.graphs.push_back(std::move(g));
  }

  if (spec.features == SyntheticSpec::FeatureScheme::DegreeAttributes) {
    // shared width across both datasets so models see one input space
    const int md = std::max(max_degree(data.id), max_degree(data.ood));
    for (GraphDataset* ds : {&data.id, &data.ood}) {
      for (auto& g : ds->graphs) {
        g.features = degree_features(g, md);
        g.feature_width = md + 1;
      }
      ds->feature_width = md + 1;
      ds->feature_source = FeatureSource::Attributes;
    }
  }
  return data;
}

}  // namespace sgood
