#include "nfuse/graphs/brain_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace nfuse {

using nlohmann::json;

std::vector<std::vector<int>> BrainGraph::neighbor_lists(bool include_self) const {
  std::vector<std::vector<int>> nbr(n_nodes);
  for (const GraphEdge& e : edges) {
    nbr[e.i].push_back(e.j);
    nbr[e.j].push_back(e.i);
  }
  for (int i = 0; i < n_nodes; ++i) {
    if (include_self) nbr[i].push_back(i);
    std::sort(nbr[i].begin(), nbr[i].end());
  }
  return nbr;
}

std::vector<int> BrainGraph::degrees() const {
  std::vector<int> deg(n_nodes, 0);
  for (const GraphEdge& e : edges) {
    ++deg[e.i];
    ++deg[e.j];
  }
  return deg;
}

void BrainGraph::validate(int min_degree) const {
  if (n_nodes <= 0) throw std::runtime_error("graph: empty");
  if (node_features.rank() != 2 || node_features.extent(0) != static_cast<std::size_t>(n_nodes))
    throw std::runtime_error("graph: node features misaligned with node count");
  node_features.require_finite("graph node features");
  const GraphEdge* prev = nullptr;
  for (const GraphEdge& e : edges) {
    if (e.i == e.j) throw std::runtime_error("graph: self-edge at node " + std::to_string(e.i));
    if (e.i > e.j) throw std::runtime_error("graph: edge not in canonical i<j order");
    if (e.i < 0 || e.j >= n_nodes) throw std::runtime_error("graph: edge endpoint out of range");
    if (!std::isfinite(e.w)) throw std::runtime_error("graph: non-finite edge weight");
    if (prev && !(prev->i < e.i || (prev->i == e.i && prev->j < e.j)))
      throw std::runtime_error("graph: duplicate or unsorted edge list");
    prev = &e;
  }
  if (min_degree > 0) {
    for (int d : degrees())
      if (d < min_degree)
        throw std::runtime_error("graph: node degree below K=" + std::to_string(min_degree));
  }
}

void save_graph(const std::filesystem::path& path, const BrainGraph& g) {
  g.validate();
  json features = json::array();
  for (std::size_t r = 0; r < g.node_features.extent(0); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < g.node_features.extent(1); ++c) row.push_back(g.node_features(r, c));
    features.push_back(std::move(row));
  }
  json edges = json::array();
  for (const GraphEdge& e : g.edges) edges.push_back({{"i", e.i}, {"j", e.j}, {"w", e.w}});
  json j{{"n_nodes", g.n_nodes},
         {"directed", false},
         {"modality", g.modality},
         {"node_features", features},
         {"edges", edges}};
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("graph: cannot open " + tmp.string());
    out << j.dump() << "\n";
  }
  std::filesystem::rename(tmp, path);
}

BrainGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("graph: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("graph: parse error in " + path.string() + ": " + e.what());
  }
  BrainGraph g;
  g.n_nodes = j.at("n_nodes").get<int>();
  if (j.contains("directed") && j.at("directed").get<bool>())
    throw std::runtime_error("graph: directed graphs are not supported");
  g.modality = j.value("modality", std::string{});
  const auto& features = j.at("node_features");
  const std::size_t rows = features.size();
  const std::size_t cols = rows ? features.at(0).size() : 0;
  g.node_features = Tensor64({rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = features.at(r);
    if (row.size() != cols) throw std::runtime_error("graph: ragged node_features");
    for (std::size_t c = 0; c < cols; ++c) g.node_features(r, c) = row.at(c).get<double>();
  }
  for (const auto& ej : j.at("edges"))
    g.edges.push_back({ej.at("i").get<int>(), ej.at("j").get<int>(), ej.at("w").get<double>()});
  g.validate();
  return g;
}

}  // namespace nfuse
