#include "nfuse/dataio/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nfuse/numerics/rng.hpp"

namespace nfuse {

namespace {

struct SiteEffects {
  std::vector<double> gamma;
  std::vector<double> delta;
};

// Deterministic spread: additive offsets span [-site_additive, +site_additive],
// noise scales span [1, site_multiplicative].
SiteEffects realize_site_effects(const PlantedEffects& e, std::size_t n_sites) {
  SiteEffects s;
  s.gamma.resize(n_sites, 0.0);
  s.delta.resize(n_sites, 1.0);
  for (std::size_t i = 0; i < n_sites; ++i) {
    const double frac = n_sites > 1 ? static_cast<double>(i) / (n_sites - 1) : 0.0;
    s.gamma[i] = e.site_additive * (2.0 * frac - 1.0);
    s.delta[i] = 1.0 + (e.site_multiplicative - 1.0) * frac;
  }
  return s;
}

bool in_any_box(const std::vector<RoiBox>& boxes, const std::vector<int>& which,
                int x, int y, int z) {
  for (int r : which) {
    const RoiBox& b = boxes[r];
    if (x >= b.lo[0] && x < b.hi[0] && y >= b.lo[1] && y < b.hi[1] && z >= b.lo[2] && z < b.hi[2])
      return true;
  }
  return false;
}

}  // namespace

CohortManifest generate_cohort(const GeneratorConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.n_subjects < 4 * cfg.n_sites)
    throw std::invalid_argument("generator: need n_subjects >= 4 * n_sites for stratification");
  if (cfg.effects.structural_effect < 0 || cfg.effects.functional_effect < 0 ||
      cfg.effects.site_additive < 0 || cfg.effects.site_multiplicative <= 0)
    throw std::invalid_argument("generator: effect sizes must be nonnegative");
  if (cfg.time_points < 8) throw std::invalid_argument("generator: T must be >= 8");

  AtlasSpec atlas = make_synthetic_atlas(cfg.n_rois, cfg.volume_extent, cfg.roi_box_side);
  const std::size_t n = cfg.n_rois;

  PlantedEffects eff = cfg.effects;
  if (eff.structural_rois.empty()) {
    const int ns = std::max<int>(1, static_cast<int>(n) / 4);
    for (int r = 0; r < ns; ++r) eff.structural_rois.push_back(r);
  }
  if (eff.functional_rois.empty()) {
    const int ns = std::max<int>(1, static_cast<int>(n) / 4);
    const int nf = std::max<int>(2, static_cast<int>(n) / 4);
    for (int r = ns; r < ns + nf && r < static_cast<int>(n); ++r) eff.functional_rois.push_back(r);
    if (eff.functional_rois.size() < 2)
      throw std::invalid_argument("generator: atlas too small for a functional ROI block");
  }
  const SiteEffects site = realize_site_effects(eff, cfg.n_sites);
  eff.site_gamma = site.gamma;
  eff.site_delta = site.delta;

  std::filesystem::create_directories(out_dir / "volumes");
  std::filesystem::create_directories(out_dir / "timeseries");

  CohortManifest manifest;
  manifest.atlas = atlas;
  manifest.seed = cfg.seed;
  manifest.time_points = cfg.time_points;
  manifest.effects = eff;

  std::vector<std::size_t> per_site_count(cfg.n_sites, 0);
  for (std::size_t i = 0; i < cfg.n_subjects; ++i) {
    const std::size_t site_idx = i % cfg.n_sites;
    auto rng = make_rng(cfg.seed, 1000 + i);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> age_dist(20.0, 60.0);

    SubjectRecord rec;
    {
      char buf[16];
      std::snprintf(buf, sizeof buf, "s%04zu", i);
      rec.id = buf;
    }
    rec.site = "site" + std::to_string(site_idx);
    rec.label = static_cast<int>(per_site_count[site_idx]++ % 2);
    rec.age = age_dist(rng);
    rec.sex = (rng() & 1) ? 1 : 0;

    const double z_age = (rec.age - 40.0) / 20.0;
    const double cov_term = eff.age_coef * z_age + eff.sex_coef * rec.sex;
    const double gamma = site.gamma[site_idx];
    const double delta = site.delta[site_idx];

    // Volume: Eq-style generative form, base + covariates + site offset +
    // subject intercept + class effect in the designated block + scaled noise.
    const double subj_u = eff.subject_sigma * normal(rng);
    Volume vol;
    vol.data = Tensor({static_cast<std::size_t>(cfg.volume_extent),
                       static_cast<std::size_t>(cfg.volume_extent),
                       static_cast<std::size_t>(cfg.volume_extent)});
    const double base = 1.0 + cov_term + gamma + subj_u;
    std::size_t idx = 0;
    for (int x = 0; x < cfg.volume_extent; ++x)
      for (int y = 0; y < cfg.volume_extent; ++y)
        for (int z = 0; z < cfg.volume_extent; ++z, ++idx) {
          double v = base + delta * eff.noise_sigma * normal(rng);
          if (rec.label == 1 && eff.structural_effect != 0.0 &&
              in_any_box(atlas.boxes, eff.structural_rois, x, y, z))
            v += eff.structural_effect;
          vol.data[idx] = static_cast<float>(v);
        }

    // Time series: shared latent factor inside the functional block makes the
    // target pairwise correlation sqrt(rho_i * rho_j) analytically exact.
    const double subj_u2 = eff.subject_sigma * normal(rng);
    RoiTimeSeries ts;
    const std::size_t t_len = cfg.time_points;
    for (int attempt = 0; attempt < 8; ++attempt) {
      ts.data = Tensor({t_len, n});
      std::vector<double> factor(t_len);
      for (auto& f : factor) f = normal(rng);
      std::vector<char> in_block(n, 0);
      for (int r : eff.functional_rois) in_block[r] = 1;
      double rho = eff.base_corr + (rec.label == 1 ? eff.functional_effect : 0.0);
      rho = std::clamp(rho, 0.0, 0.999);
      const double load = std::sqrt(rho);
      const double resid = std::sqrt(1.0 - rho);
      for (std::size_t r = 0; r < n; ++r) {
        const double mean_r = 0.5 + cov_term + gamma + subj_u2;
        const double scale_r = eff.noise_sigma * delta;
        for (std::size_t t = 0; t < t_len; ++t) {
          const double latent =
              in_block[r] ? load * factor[t] + resid * normal(rng) : normal(rng);
          ts.data(t, r) = static_cast<float>(mean_r + scale_r * latent);
        }
      }
      bool constant_column = false;
      for (std::size_t r = 0; r < n && !constant_column; ++r) {
        const float first = ts.data(0, r);
        bool all_same = true;
        for (std::size_t t = 1; t < t_len; ++t)
          if (ts.data(t, r) != first) { all_same = false; break; }
        constant_column = all_same;
      }
      if (!constant_column) break;
      if (attempt == 7) throw std::runtime_error("generator: could not avoid constant column");
    }

    ManifestSubject ms;
    ms.record = rec;
    ms.volume_path = "volumes/" + rec.id + ".ngt";
    ms.timeseries_path = "timeseries/" + rec.id + ".ngt";
    save_volume(out_dir / ms.volume_path, vol);
    save_timeseries(out_dir / ms.timeseries_path, ts);
    manifest.subjects.push_back(std::move(ms));
  }

  manifest.base_dir = out_dir;
  save_manifest(out_dir / "manifest.json", manifest);
  manifest.validate(false);
  return manifest;
}

}  // namespace nfuse
