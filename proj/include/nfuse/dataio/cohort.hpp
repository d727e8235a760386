#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nfuse/dataio/atlas.hpp"
#include "nfuse/numerics/tensor.hpp"

namespace nfuse {

struct SubjectRecord {
  std::string id;
  std::string site;
  double age = 0.0;
  int sex = 0;    // binary covariate
  int label = 0;  // 1 = patient class, 0 = control
};

// 3-D scalar field, shape {nx, ny, nz}.
struct Volume {
  Tensor data;
  std::array<int, 3> extents() const {
    return {static_cast<int>(data.extent(0)), static_cast<int>(data.extent(1)),
            static_cast<int>(data.extent(2))};
  }
  float at(int x, int y, int z) const {
    const auto& s = data.shape();
    return data[(static_cast<std::size_t>(x) * s[1] + y) * s[2] + z];
  }
  float& at(int x, int y, int z) {
    const auto& s = data.shape();
    return data[(static_cast<std::size_t>(x) * s[1] + y) * s[2] + z];
  }
};

// T time points x N ROIs.
struct RoiTimeSeries {
  Tensor data;
  std::size_t time_points() const { return data.extent(0); }
  std::size_t roi_count() const { return data.extent(1); }
};

// Planted-effect parameters; recorded in the manifest so tests can use the
// generator's construction as ground truth.
struct PlantedEffects {
  double structural_effect = 0.0;   // class shift of mean intensity in the structural ROI block
  double functional_effect = 0.0;   // class increase of pairwise correlation in the functional block
  double site_additive = 0.0;       // spread of per-site additive offsets
  double site_multiplicative = 1.0; // max per-site noise scale
  double age_coef = 0.0;
  double sex_coef = 0.0;
  double subject_sigma = 0.0;       // per-subject random intercept
  double noise_sigma = 1.0;
  double base_corr = 0.1;           // within-block correlation for the control class
  std::vector<int> structural_rois; // ROI indices carrying the structural class effect
  std::vector<int> functional_rois; // ROI block with boosted pairwise correlation
  std::vector<double> site_gamma;   // realized per-site additive offsets
  std::vector<double> site_delta;   // realized per-site noise scales
};

struct ManifestSubject {
  SubjectRecord record;
  std::string volume_path;      // relative to the manifest directory
  std::string timeseries_path;
};

struct CohortManifest {
  int schema_version = 1;
  AtlasSpec atlas;
  std::uint64_t seed = 0;
  std::size_t time_points = 0;
  std::optional<PlantedEffects> effects;  // present for synthetic cohorts
  std::vector<ManifestSubject> subjects;
  std::filesystem::path base_dir;  // set on load; not serialized

  std::vector<SubjectRecord> records() const;
  std::filesystem::path volume_file(std::size_t i) const { return base_dir / subjects[i].volume_path; }
  std::filesystem::path timeseries_file(std::size_t i) const { return base_dir / subjects[i].timeseries_path; }

  // Unique ids, stratifiable sites, referenced files present and parseable.
  void validate(bool check_files = true) const;
};

void save_volume(const std::filesystem::path& path, const Volume& v);
Volume load_volume(const std::filesystem::path& path);
void save_timeseries(const std::filesystem::path& path, const RoiTimeSeries& ts);
RoiTimeSeries load_timeseries(const std::filesystem::path& path);

void save_manifest(const std::filesystem::path& path, const CohortManifest& m);
CohortManifest load_manifest(const std::filesystem::path& path);

}  // namespace nfuse
