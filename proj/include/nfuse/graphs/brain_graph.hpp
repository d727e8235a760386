#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nfuse/graphs/similarity.hpp"
#include "nfuse/numerics/tensor.hpp"

namespace nfuse {

struct GraphEdge {
  int i = 0;
  int j = 0;  // stored once with i < j
  double w = 0.0;
};

// Undirected weighted brain graph; node order equals atlas ROI order.
struct BrainGraph {
  int n_nodes = 0;
  std::string modality;       // "structural" | "functional"
  Tensor64 node_features;     // N x d
  std::vector<GraphEdge> edges;

  std::size_t feature_dim() const { return node_features.rank() == 2 ? node_features.extent(1) : 0; }

  // Sorted adjacency lists; self-loops appended when requested (the GAT
  // attends over N(i) plus the node itself).
  std::vector<std::vector<int>> neighbor_lists(bool include_self) const;

  std::vector<int> degrees() const;

  // No self-edges, canonical i<j order without duplicates, finite weights,
  // features aligned with n_nodes.
  void validate(int min_degree = 0) const;
};

// Union over nodes of each node's K strongest off-diagonal similarities
// (ties broken toward the lower index); edge weight = similarity value.
BrainGraph knn_graph(const SimilarityMatrix& sim, int k, const Tensor64& node_features,
                     std::string modality);

// cosine -> knn with the embeddings as node features.
BrainGraph build_structural_graph(const Tensor64& embeddings, int k);
// pearson -> fisher z -> knn; node i's feature is row i of the transformed FCN.
BrainGraph build_functional_graph(const RoiTimeSeries& ts, int k);

void save_graph(const std::filesystem::path& path, const BrainGraph& g);
BrainGraph load_graph(const std::filesystem::path& path);

}  // namespace nfuse
