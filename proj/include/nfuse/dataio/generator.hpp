#pragma once

#include <cstdint>
#include <filesystem>

#include "nfuse/dataio/cohort.hpp"

namespace nfuse {

// Synthetic multi-site cohort with planted, analytically known effects:
//   - class label shifts mean intensity inside a designated ROI block of the volume,
//   - class label raises pairwise correlation inside a designated ROI block of the
//     time series (shared latent factor, so target correlations are closed-form),
//   - each site adds a planted additive offset and noise-scale factor,
//   - age/sex add linear trends.
struct GeneratorConfig {
  std::size_t n_subjects = 100;
  std::size_t n_sites = 2;
  std::size_t n_rois = 16;
  int volume_extent = 48;
  int roi_box_side = 8;
  std::size_t time_points = 64;
  int patch_side = 8;  // recorded for downstream extraction defaults
  PlantedEffects effects;
  std::uint64_t seed = 0;
};

// Writes per-subject volume/time-series files plus manifest.json under out_dir.
// Deterministic: identical config => identical bytes.
CohortManifest generate_cohort(const GeneratorConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace nfuse
