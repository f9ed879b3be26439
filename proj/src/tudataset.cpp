#include "sgood/tudataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sgood {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& file, bool required) {
  std::ifstream in(file);
  if (!in) {
    if (required) throw std::runtime_error("parse_tudataset: missing file " + file.string());
    return {};
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

// Comma- and/or whitespace-separated numeric tokens.
std::vector<double> split_numbers(const std::string& line, const std::filesystem::path& file) {
  std::string normalized = line;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream iss(normalized);
  std::vector<double> out;
  double v = 0.0;
  while (iss >> v) out.push_back(v);
  if (!iss.eof()) {
    throw std::runtime_error("parse_tudataset: malformed line in " + file.string() + ": " + line);
  }
  return out;
}

std::vector<long long> split_ints(const std::string& line, const std::filesystem::path& file) {
  const auto nums = split_numbers(line, file);
  std::vector<long long> out;
  out.reserve(nums.size());
  for (const double v : nums) out.push_back(static_cast<long long>(v));
  return out;
}

}  // namespace

GraphDataset parse_tudataset(const std::filesystem::path& root, const std::string& name) {
  const auto file_a = root / (name + "_A.txt");
  const auto file_ind = root / (name + "_graph_indicator.txt");
  const auto file_gl = root / (name + "_graph_labels.txt");
  const auto file_nl = root / (name + "_node_labels.txt");
  const auto file_na = root / (name + "_node_attributes.txt");

  const auto ind_lines = read_lines(file_ind, true);
  const int total_nodes = static_cast<int>(ind_lines.size());

  // graph id per node, 1-based in file
  std::vector<int> node_graph(static_cast<std::size_t>(total_nodes));
  int num_graphs = 0;
  for (int i = 0; i < total_nodes; ++i) {
    const auto vals = split_ints(ind_lines[i], file_ind);
    if (vals.size() != 1) throw std::runtime_error("parse_tudataset: bad graph_indicator row");
    const int gid = static_cast<int>(vals[0]);
    if (gid < 1) throw std::runtime_error("parse_tudataset: graph id out of range");
    node_graph[i] = gid - 1;
    num_graphs = std::max(num_graphs, gid);
  }

  // local index of each node within its graph
  std::vector<int> node_local(static_cast<std::size_t>(total_nodes));
  std::vector<int> graph_size(static_cast<std::size_t>(num_graphs), 0);
  for (int i = 0; i < total_nodes; ++i) {
    node_local[i] = graph_size[node_graph[i]]++;
  }

  const auto label_lines = read_lines(file_gl, true);
  if (static_cast<int>(label_lines.size()) != num_graphs) {
    throw std::runtime_error("parse_tudataset: graph label count does not match graph count");
  }
  std::vector<int> raw_labels(static_cast<std::size_t>(num_graphs));
  for (int g = 0; g < num_graphs; ++g) {
    const auto vals = split_ints(label_lines[g], file_gl);
    if (vals.size() != 1) throw std::runtime_error("parse_tudataset: bad graph_labels row");
    raw_labels[g] = static_cast<int>(vals[0]);
  }
  std::set<int> distinct(raw_labels.begin(), raw_labels.end());
  std::map<int, int> dense;
  std::vector<int> original;
  for (const int v : distinct) {
    dense[v] = static_cast<int>(original.size());
    original.push_back(v);
  }

  GraphDataset ds;
  ds.name = name;
  ds.num_classes = static_cast<int>(original.size());
  ds.original_labels = original;
  ds.graphs.resize(static_cast<std::size_t>(num_graphs));
  for (int g = 0; g < num_graphs; ++g) {
    ds.graphs[g].node_count = graph_size[g];
    ds.graphs[g].label = dense.at(raw_labels[g]);
  }

  // edges
  std::vector<std::vector<std::pair<int, int>>> edges(static_cast<std::size_t>(num_graphs));
  for (const auto& line : read_lines(file_a, true)) {
    const auto vals = split_ints(line, file_a);
    if (vals.size() != 2) throw std::runtime_error("parse_tudataset: bad edge row");
    const long long u = vals[0] - 1;
    const long long v = vals[1] - 1;
    if (u < 0 || u >= total_nodes || v < 0 || v >= total_nodes) {
      throw std::runtime_error("parse_tudataset: node index out of range in " + file_a.string());
    }
    if (node_graph[u] != node_graph[v]) {
      throw std::runtime_error("parse_tudataset: edge crosses graphs");
    }
    edges[node_graph[u]].emplace_back(node_local[u], node_local[v]);
  }
  for (int g = 0; g < num_graphs; ++g) {
    const Graph shell = make_graph(graph_size[g], std::move(edges[g]));
    ds.graphs[g].edges = shell.edges;
  }

  // optional node labels
  const auto nl_lines = read_lines(file_nl, false);
  const bool has_node_labels = !nl_lines.empty();
  if (has_node_labels) {
    if (static_cast<int>(nl_lines.size()) != total_nodes) {
      throw std::runtime_error("parse_tudataset: node label count does not match node count");
    }
    for (auto& g : ds.graphs) g.node_labels.resize(static_cast<std::size_t>(g.node_count));
    for (int i = 0; i < total_nodes; ++i) {
      const auto vals = split_ints(nl_lines[i], file_nl);
      if (vals.size() != 1) throw std::runtime_error("parse_tudataset: bad node_labels row");
      ds.graphs[node_graph[i]].node_labels[node_local[i]] = static_cast<int>(vals[0]);
    }
  }

  // optional node attributes
  const auto na_lines = read_lines(file_na, false);
  if (!na_lines.empty()) {
    if (static_cast<int>(na_lines.size()) != total_nodes) {
      throw std::runtime_error("parse_tudataset: attribute count does not match node count");
    }
    const int width = static_cast<int>(split_numbers(na_lines[0], file_na).size());
    if (width == 0) throw std::runtime_error("parse_tudataset: empty attribute row");
    for (auto& g : ds.graphs) {
      g.feature_width = width;
      g.features.assign(static_cast<std::size_t>(g.node_count) * width, 0.0);
    }
    for (int i = 0; i < total_nodes; ++i) {
      const auto vals = split_numbers(na_lines[i], file_na);
      if (static_cast<int>(vals.size()) != width) {
        throw std::runtime_error("parse_tudataset: ragged attribute rows in " + file_na.string());
      }
      Graph& g = ds.graphs[node_graph[i]];
      std::copy(vals.begin(), vals.end(),
                g.features.begin() + static_cast<std::size_t>(node_local[i]) * width);
    }
    ds.feature_width = width;
    ds.feature_source = FeatureSource::Attributes;
  } else if (has_node_labels) {
    // one-hot of node labels, dense over the distinct values in the dataset
    std::set<int> values;
    for (const auto& g : ds.graphs) values.insert(g.node_labels.begin(), g.node_labels.end());
    std::map<int, int> index;
    for (const int v : values) index[v] = static_cast<int>(index.size());
    const int width = static_cast<int>(values.size());
    for (auto& g : ds.graphs) {
      g.feature_width = width;
      g.features.assign(static_cast<std::size_t>(g.node_count) * width, 0.0);
      for (int v = 0; v < g.node_count; ++v) {
        g.features[static_cast<std::size_t>(v) * width + index.at(g.node_labels[v])] = 1.0;
      }
    }
    ds.feature_width = width;
    ds.feature_source = FeatureSource::NodeLabelOneHot;
  }

  return ds;
}

void write_tudataset(const GraphDataset& dataset, const std::filesystem::path& root) {
  std::filesystem::create_directories(root);
  const std::string& name = dataset.name;
  std::ofstream fa(root / (name + "_A.txt"));
  std::ofstream find(root / (name + "_graph_indicator.txt"));
  std::ofstream fgl(root / (name + "_graph_labels.txt"));
  if (!fa || !find || !fgl) {
    throw std::runtime_error("write_tudataset: cannot open output files under " + root.string());
  }

  const bool write_node_labels =
      std::any_of(dataset.graphs.begin(), dataset.graphs.end(),
                  [](const Graph& g) { return !g.node_labels.empty(); });
  const bool write_attributes =
      dataset.feature_source == FeatureSource::Attributes && dataset.feature_width > 0;

  std::ofstream fnl;
  if (write_node_labels) fnl.open(root / (name + "_node_labels.txt"));
  std::ofstream fna;
  if (write_attributes) fna.open(root / (name + "_node_attributes.txt"));

  int offset = 0;
  int graph_id = 1;
  for (const auto& g : dataset.graphs) {
    for (const auto& [u, v] : g.edges) {
      fa << (offset + u + 1) << ", " << (offset + v + 1) << "\n";
      fa << (offset + v + 1) << ", " << (offset + u + 1) << "\n";
    }
    for (int v = 0; v < g.node_count; ++v) {
      find << graph_id << "\n";
      if (write_node_labels) fnl << (g.node_labels.empty() ? 0 : g.node_labels[v]) << "\n";
      if (write_attributes) {
        const auto row = g.feature_row(v);
        char buf[64];
        for (std::size_t k = 0; k < row.size(); ++k) {
          std::snprintf(buf, sizeof(buf), "%.17g", row[k]);
          fna << (k ? ", " : "") << buf;
        }
        fna << "\n";
      }
    }
    const int dense = g.label.value_or(0);
    fgl << dataset.original_labels.at(static_cast<std::size_t>(dense)) << "\n";
    offset += g.node_count;
    ++graph_id;
  }
}

}  // namespace sgood
