#pragma once

#include "nfuse/dataio/cohort.hpp"
#include "nfuse/numerics/tensor.hpp"

namespace nfuse {

enum class SimilarityKind { cosine, correlation, fisher_z };

// Symmetric N x N similarity; diagonal convention depends on the kind
// (1 for cosine/correlation, 0 after the Fisher transform).
struct SimilarityMatrix {
  SimilarityKind kind = SimilarityKind::cosine;
  Tensor64 values;

  std::size_t size() const { return values.extent(0); }
  double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
};

// COS_ij = <z_i, z_j> / (|z_i| |z_j|); rows are embeddings. Zero-norm rows
// are an error.
SimilarityMatrix cosine_similarity_matrix(const Tensor64& embeddings);

// Pearson correlation between ROI time-series columns; a constant column is
// an error naming the ROI.
SimilarityMatrix pearson_fcn(const RoiTimeSeries& ts);

// z = atanh(r) with |r| clamped to 1 - 1e-7; diagonal set to 0 so
// self-similarity never enters neighbor selection.
SimilarityMatrix fisher_z(const SimilarityMatrix& m);

}  // namespace nfuse
