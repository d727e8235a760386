#include "nfuse/dataio/patches.hpp"

#include <stdexcept>

namespace nfuse {

RoiPatchSet extract_roi_patches(const Volume& v, const AtlasSpec& atlas, int p) {
  const auto ext = v.extents();
  if (p <= 0 || p > ext[0] || p > ext[1] || p > ext[2])
    throw std::invalid_argument("extract_roi_patches: patch side exceeds volume extent");
  atlas.validate(ext, false);

  const std::size_t n = atlas.roi_count();
  const std::size_t ps = static_cast<std::size_t>(p);
  RoiPatchSet set;
  set.data = Tensor({n, ps, ps, ps});
  const int half = p / 2;
  for (std::size_t r = 0; r < n; ++r) {
    const auto c = atlas.boxes[r].centroid();
    float* out = set.patch(r);
    std::size_t idx = 0;
    for (int dx = 0; dx < p; ++dx) {
      const int x = c[0] - half + dx;
      for (int dy = 0; dy < p; ++dy) {
        const int y = c[1] - half + dy;
        for (int dz = 0; dz < p; ++dz, ++idx) {
          const int z = c[2] - half + dz;
          const bool inside = x >= 0 && x < ext[0] && y >= 0 && y < ext[1] && z >= 0 && z < ext[2];
          out[idx] = inside ? v.at(x, y, z) : 0.0f;
        }
      }
    }
  }
  return set;
}

}  // namespace nfuse
