#include "nfuse/dataio/atlas.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nfuse {

void AtlasSpec::validate(const std::array<int, 3>& ext, bool require_disjoint) const {
  if (boxes.size() < 2) throw std::invalid_argument("atlas '" + name + "': needs >= 2 ROIs");
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const RoiBox& b = boxes[i];
    if (b.empty()) throw std::invalid_argument("atlas '" + name + "': empty ROI box " + std::to_string(i));
    for (int a = 0; a < 3; ++a)
      if (b.lo[a] < 0 || b.hi[a] > ext[a])
        throw std::invalid_argument("atlas '" + name + "': ROI box " + std::to_string(i) +
                                    " outside volume");
  }
  if (require_disjoint) {
    for (std::size_t i = 0; i < boxes.size(); ++i)
      for (std::size_t j = i + 1; j < boxes.size(); ++j)
        if (boxes[i].overlaps(boxes[j]))
          throw std::invalid_argument("atlas '" + name + "': ROI boxes " + std::to_string(i) +
                                      " and " + std::to_string(j) + " overlap");
  }
}

AtlasSpec make_synthetic_atlas(std::size_t n_rois, int volume_extent, int box_side) {
  if (n_rois < 2) throw std::invalid_argument("synthetic atlas: needs >= 2 ROIs");
  int grid = 1;
  while (static_cast<std::size_t>(grid) * grid * grid < n_rois) ++grid;
  const int cell = volume_extent / grid;
  if (box_side > cell)
    throw std::invalid_argument("synthetic atlas: box side " + std::to_string(box_side) +
                                " does not fit grid cell " + std::to_string(cell));
  AtlasSpec atlas;
  atlas.name = "synthetic-" + std::to_string(n_rois);
  atlas.boxes.reserve(n_rois);
  for (std::size_t r = 0; r < n_rois; ++r) {
    const int gx = static_cast<int>(r) % grid;
    const int gy = (static_cast<int>(r) / grid) % grid;
    const int gz = static_cast<int>(r) / (grid * grid);
    RoiBox b;
    const int margin = (cell - box_side) / 2;
    b.lo = {gx * cell + margin, gy * cell + margin, gz * cell + margin};
    b.hi = {b.lo[0] + box_side, b.lo[1] + box_side, b.lo[2] + box_side};
    atlas.boxes.push_back(b);
  }
  atlas.validate({volume_extent, volume_extent, volume_extent}, true);
  return atlas;
}

}  // namespace nfuse
