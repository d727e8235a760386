#include "nfuse/dataio/cohort.hpp"

#include <array>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "nfuse/numerics/ngt_io.hpp"

namespace nfuse {

using nlohmann::json;

namespace {

json atlas_to_json(const AtlasSpec& a) {
  json boxes = json::array();
  for (const RoiBox& b : a.boxes)
    boxes.push_back({{"x0", b.lo[0]}, {"y0", b.lo[1]}, {"z0", b.lo[2]},
                     {"x1", b.hi[0]}, {"y1", b.hi[1]}, {"z1", b.hi[2]}});
  return json{{"name", a.name}, {"roi_count", a.roi_count()}, {"boxes", boxes}};
}

AtlasSpec atlas_from_json(const json& j) {
  AtlasSpec a;
  a.name = j.at("name").get<std::string>();
  for (const auto& bj : j.at("boxes")) {
    RoiBox b;
    b.lo = {bj.at("x0").get<int>(), bj.at("y0").get<int>(), bj.at("z0").get<int>()};
    b.hi = {bj.at("x1").get<int>(), bj.at("y1").get<int>(), bj.at("z1").get<int>()};
    a.boxes.push_back(b);
  }
  if (j.contains("roi_count") && j.at("roi_count").get<std::size_t>() != a.boxes.size())
    throw std::runtime_error("manifest: atlas roi_count disagrees with box list");
  return a;
}

json effects_to_json(const PlantedEffects& e) {
  return json{{"structural_effect", e.structural_effect},
              {"functional_effect", e.functional_effect},
              {"site_additive", e.site_additive},
              {"site_multiplicative", e.site_multiplicative},
              {"age_coef", e.age_coef},
              {"sex_coef", e.sex_coef},
              {"subject_sigma", e.subject_sigma},
              {"noise_sigma", e.noise_sigma},
              {"base_corr", e.base_corr},
              {"structural_rois", e.structural_rois},
              {"functional_rois", e.functional_rois},
              {"site_gamma", e.site_gamma},
              {"site_delta", e.site_delta}};
}

PlantedEffects effects_from_json(const json& j) {
  PlantedEffects e;
  e.structural_effect = j.at("structural_effect").get<double>();
  e.functional_effect = j.at("functional_effect").get<double>();
  e.site_additive = j.at("site_additive").get<double>();
  e.site_multiplicative = j.at("site_multiplicative").get<double>();
  e.age_coef = j.at("age_coef").get<double>();
  e.sex_coef = j.at("sex_coef").get<double>();
  e.subject_sigma = j.at("subject_sigma").get<double>();
  e.noise_sigma = j.at("noise_sigma").get<double>();
  e.base_corr = j.at("base_corr").get<double>();
  e.structural_rois = j.at("structural_rois").get<std::vector<int>>();
  e.functional_rois = j.at("functional_rois").get<std::vector<int>>();
  e.site_gamma = j.at("site_gamma").get<std::vector<double>>();
  e.site_delta = j.at("site_delta").get<std::vector<double>>();
  return e;
}

}  // namespace

std::vector<SubjectRecord> CohortManifest::records() const {
  std::vector<SubjectRecord> out;
  out.reserve(subjects.size());
  for (const auto& s : subjects) out.push_back(s.record);
  return out;
}

void CohortManifest::validate(bool check_files) const {
  std::set<std::string> ids;
  std::map<std::string, std::array<int, 2>> per_site_class;
  for (const auto& s : subjects) {
    if (!ids.insert(s.record.id).second)
      throw std::runtime_error("manifest: duplicate subject id " + s.record.id);
    if (s.record.label != 0 && s.record.label != 1)
      throw std::runtime_error("manifest: label must be 0/1 for " + s.record.id);
    per_site_class[s.record.site][s.record.label]++;
  }
  for (const auto& [site, counts] : per_site_class)
    if (counts[0] < 2 || counts[1] < 2)
      throw std::runtime_error("manifest: site " + site +
                               " needs >= 2 subjects per class for stratification");
  if (check_files) {
    for (std::size_t i = 0; i < subjects.size(); ++i) {
      for (const auto& p : {volume_file(i), timeseries_file(i)}) {
        if (!std::filesystem::exists(p))
          throw std::runtime_error("manifest: missing file " + p.string());
      }
      load_volume(volume_file(i));
      RoiTimeSeries ts = load_timeseries(timeseries_file(i));
      if (ts.time_points() < 8) throw std::runtime_error("manifest: T < 8 in " + subjects[i].timeseries_path);
    }
  }
}

void save_volume(const std::filesystem::path& path, const Volume& v) {
  if (v.data.rank() != 3) throw std::invalid_argument("volume must be rank 3");
  save_ngt(path, v.data);
}

Volume load_volume(const std::filesystem::path& path) {
  Volume v{load_ngt(path)};
  if (v.data.rank() != 3) throw std::runtime_error("volume file is not rank 3: " + path.string());
  return v;
}

void save_timeseries(const std::filesystem::path& path, const RoiTimeSeries& ts) {
  if (ts.data.rank() != 2) throw std::invalid_argument("time series must be rank 2");
  save_ngt(path, ts.data);
}

RoiTimeSeries load_timeseries(const std::filesystem::path& path) {
  RoiTimeSeries ts{load_ngt(path)};
  if (ts.data.rank() != 2) throw std::runtime_error("time series file is not rank 2: " + path.string());
  return ts;
}

void save_manifest(const std::filesystem::path& path, const CohortManifest& m) {
  json subjects = json::array();
  for (const auto& s : m.subjects)
    subjects.push_back({{"id", s.record.id},
                        {"site", s.record.site},
                        {"age", s.record.age},
                        {"sex", s.record.sex},
                        {"label", s.record.label},
                        {"volume_path", s.volume_path},
                        {"timeseries_path", s.timeseries_path}});
  json j{{"schema_version", m.schema_version},
         {"atlas", atlas_to_json(m.atlas)},
         {"seed", m.seed},
         {"time_points", m.time_points},
         {"effects", m.effects ? effects_to_json(*m.effects) : json(nullptr)},
         {"subjects", subjects}};
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("manifest: cannot open " + tmp.string());
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

CohortManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("manifest: parse error in " + path.string() + ": " + e.what());
  }
  CohortManifest m;
  const int version = j.at("schema_version").get<int>();
  if (version != 1)
    throw std::runtime_error("manifest: unsupported schema_version " + std::to_string(version));
  m.schema_version = version;
  m.atlas = atlas_from_json(j.at("atlas"));
  m.seed = j.at("seed").get<std::uint64_t>();
  m.time_points = j.value("time_points", std::size_t(0));
  if (j.contains("effects") && !j.at("effects").is_null())
    m.effects = effects_from_json(j.at("effects"));
  for (const auto& sj : j.at("subjects")) {
    ManifestSubject s;
    s.record.id = sj.at("id").get<std::string>();
    s.record.site = sj.at("site").get<std::string>();
    s.record.age = sj.at("age").get<double>();
    s.record.sex = sj.at("sex").get<int>();
    s.record.label = sj.at("label").get<int>();
    s.volume_path = sj.at("volume_path").get<std::string>();
    s.timeseries_path = sj.at("timeseries_path").get<std::string>();
    m.subjects.push_back(std::move(s));
  }
  m.base_dir = path.parent_path();
  return m;
}

}  // namespace nfuse
