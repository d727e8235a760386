#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace nfuse {

// Integer voxel cuboid, half-open on every axis.
struct RoiBox {
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};

  std::array<int, 3> centroid() const {
    return {(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2};
  }
  bool empty() const { return hi[0] <= lo[0] || hi[1] <= lo[1] || hi[2] <= lo[2]; }
  bool overlaps(const RoiBox& o) const {
    for (int a = 0; a < 3; ++a)
      if (hi[a] <= o.lo[a] || o.hi[a] <= lo[a]) return false;
    return true;
  }
};

// Fixed parcellation of the volume into ROIs; node order everywhere follows
// the box order given here.
struct AtlasSpec {
  std::string name;
  std::vector<RoiBox> boxes;

  std::size_t roi_count() const { return boxes.size(); }

  // Throws unless: >= 2 ROIs, every box nonempty and inside the extents,
  // and (when required) boxes pairwise disjoint.
  void validate(const std::array<int, 3>& volume_extents, bool require_disjoint = true) const;
};

// Grid-placed cubic ROIs inside a cubic volume; deterministic layout.
AtlasSpec make_synthetic_atlas(std::size_t n_rois, int volume_extent, int box_side);

}  // namespace nfuse
