#pragma once

#include "nfuse/dataio/atlas.hpp"
#include "nfuse/dataio/cohort.hpp"
#include "nfuse/numerics/tensor.hpp"

namespace nfuse {

// N cubic patches of side p, shape {N, p, p, p}; patch order follows the
// atlas ROI order.
struct RoiPatchSet {
  Tensor data;
  std::size_t roi_count() const { return data.extent(0); }
  int side() const { return static_cast<int>(data.extent(1)); }
  float* patch(std::size_t r) { return data.data() + r * data.extent(1) * data.extent(2) * data.extent(3); }
  const float* patch(std::size_t r) const {
    return data.data() + r * data.extent(1) * data.extent(2) * data.extent(3);
  }
  std::size_t patch_volume() const { return data.extent(1) * data.extent(2) * data.extent(3); }
};

// Crops the side-p cube centered on each ROI box centroid, zero-padding at
// volume borders.
RoiPatchSet extract_roi_patches(const Volume& v, const AtlasSpec& atlas, int p);

}  // namespace nfuse
