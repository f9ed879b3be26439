#pragma once

#include <filesystem>
#include <string>

#include "sgood/graph.hpp"

namespace sgood {

// Reads the TUDataset text format from <root>/<name>_A.txt,
// <name>_graph_indicator.txt and <name>_graph_labels.txt, plus the optional
// <name>_node_labels.txt and <name>_node_attributes.txt. Node and graph
// indices in the files are 1-based; edge rows appear in either or both
// orientations and are collapsed to single undirected edges. Class labels
// are remapped to a dense 0-based range (original values kept for output).
GraphDataset parse_tudataset(const std::filesystem::path& root, const std::string& name);

// Writes a dataset in the same format, each edge in both orientations.
void write_tudataset(const GraphDataset& dataset, const std::filesystem::path& root);

}  // namespace sgood
