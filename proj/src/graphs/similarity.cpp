#include "nfuse/graphs/similarity.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nfuse/kernels/kernels.hpp"

namespace nfuse {

SimilarityMatrix cosine_similarity_matrix(const Tensor64& embeddings) {
  if (embeddings.rank() != 2) throw std::invalid_argument("cosine: embeddings must be N x d");
  const std::size_t n = embeddings.extent(0), d = embeddings.extent(1);
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    norms[i] = std::sqrt(kern::dot(d, embeddings.row(i), embeddings.row(i)));
    if (norms[i] < 1e-12)
      throw std::invalid_argument("cosine: zero-norm embedding at row " + std::to_string(i));
  }
  SimilarityMatrix sim;
  sim.kind = SimilarityKind::cosine;
  sim.values = Tensor64({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    sim.values(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = kern::dot(d, embeddings.row(i), embeddings.row(j)) / (norms[i] * norms[j]);
      sim.values(i, j) = c;
      sim.values(j, i) = c;
    }
  }
  return sim;
}

SimilarityMatrix pearson_fcn(const RoiTimeSeries& ts) {
  const std::size_t t = ts.time_points(), n = ts.roi_count();
  if (t < 2) throw std::invalid_argument("pearson: needs >= 2 time points");
  // Center columns once; correlations are centered dot products.
  Tensor64 centered({n, t});
  std::vector<double> norms(n);
  for (std::size_t r = 0; r < n; ++r) {
    double mean = 0.0;
    for (std::size_t i = 0; i < t; ++i) mean += ts.data(i, r);
    mean /= static_cast<double>(t);
    double ss = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
      const double c = ts.data(i, r) - mean;
      centered(r, i) = c;
      ss += c * c;
    }
    if (ss < 1e-20)
      throw std::invalid_argument("pearson: ROI " + std::to_string(r) + " has a constant signal");
    norms[r] = std::sqrt(ss);
  }
  SimilarityMatrix sim;
  sim.kind = SimilarityKind::correlation;
  sim.values = Tensor64({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    sim.values(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = kern::dot(t, centered.row(i), centered.row(j)) / (norms[i] * norms[j]);
      sim.values(i, j) = r;
      sim.values(j, i) = r;
    }
  }
  return sim;
}

SimilarityMatrix fisher_z(const SimilarityMatrix& m) {
  if (m.kind != SimilarityKind::correlation)
    throw std::invalid_argument("fisher_z: input must be a correlation matrix");
  const std::size_t n = m.size();
  const double clamp = 1.0 - 1e-7;
  SimilarityMatrix out;
  out.kind = SimilarityKind::fisher_z;
  out.values = Tensor64({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        out.values(i, j) = 0.0;
        continue;
      }
      double r = m.values(i, j);
      if (r > clamp) r = clamp;
      if (r < -clamp) r = -clamp;
      out.values(i, j) = 0.5 * std::log((1.0 + r) / (1.0 - r));
    }
  }
  return out;
}

}  // namespace nfuse
