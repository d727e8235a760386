#include <algorithm>
#include <stdexcept>

#include "nfuse/graphs/brain_graph.hpp"

namespace nfuse {

BrainGraph knn_graph(const SimilarityMatrix& sim, int k, const Tensor64& node_features,
                     std::string modality) {
  const int n = static_cast<int>(sim.size());
  if (k < 1 || k >= n)
    throw std::invalid_argument("knn_graph: K must satisfy 1 <= K < N");
  if (node_features.rank() != 2 || static_cast<int>(node_features.extent(0)) != n)
    throw std::invalid_argument("knn_graph: node feature rows must equal N");

  // Candidate order: similarity descending, then node index ascending.
  std::vector<std::pair<double, int>> cand;
  std::vector<std::vector<char>> picked(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) {
    cand.clear();
    for (int j = 0; j < n; ++j)
      if (j != i) cand.emplace_back(sim.values(i, j), j);
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (int t = 0; t < k; ++t) {
      const int j = cand[t].second;
      picked[std::min(i, j)][std::max(i, j)] = 1;
    }
  }

  BrainGraph g;
  g.n_nodes = n;
  g.modality = std::move(modality);
  g.node_features = node_features;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (picked[i][j]) g.edges.push_back({i, j, sim.values(i, j)});
  g.validate(k);
  return g;
}

BrainGraph build_structural_graph(const Tensor64& embeddings, int k) {
  return knn_graph(cosine_similarity_matrix(embeddings), k, embeddings, "structural");
}

BrainGraph build_functional_graph(const RoiTimeSeries& ts, int k) {
  const SimilarityMatrix z = fisher_z(pearson_fcn(ts));
  return knn_graph(z, k, z.values, "functional");
}

}  // namespace nfuse
