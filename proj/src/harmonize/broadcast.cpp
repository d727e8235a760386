#include "nfuse/harmonize/broadcast.hpp"

#include <cmath>
#include <iostream>
#include <set>
#include <stdexcept>

namespace nfuse {

namespace {

// Population mean/std over a contiguous span. Throws on (near-)constant
// regions, mirroring the exclusion of regions with missing signal.
void span_stats(const float* x, std::size_t n, std::size_t roi, double& mean, double& sd) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  mean = s / static_cast<double>(n);
  double v = 0.0;
  for (std::size_t i = 0; i < n; ++i) v += (x[i] - mean) * (x[i] - mean);
  v /= static_cast<double>(n);
  if (v < 1e-20)
    throw std::runtime_error("harmonize: ROI " + std::to_string(roi) + " has constant signal");
  sd = std::sqrt(v);
}

void ts_stats(const RoiTimeSeries& ts, std::vector<double>& means, std::vector<double>& lstds) {
  const std::size_t t = ts.time_points(), n = ts.roi_count();
  means.resize(n);
  lstds.resize(n);
  std::vector<float> col(t);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < t; ++i) col[i] = ts.data(i, r);
    double m, sd;
    span_stats(col.data(), t, r, m, sd);
    means[r] = m;
    lstds[r] = std::log(sd);
  }
}

void patch_stats(const RoiPatchSet& ps, std::vector<double>& means, std::vector<double>& lstds) {
  const std::size_t n = ps.roi_count(), pv = ps.patch_volume();
  means.resize(n);
  lstds.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    double m, sd;
    span_stats(ps.patch(r), pv, r, m, sd);
    means[r] = m;
    lstds[r] = std::log(sd);
  }
}

}  // namespace

RegionStatsHarmonizer RegionStatsHarmonizer::fit(const Tensor64& means, const Tensor64& log_stds,
                                                 const std::vector<SubjectRecord>& records,
                                                 const std::vector<std::size_t>& fit_subset,
                                                 const HarmonizeOptions& opt) {
  RegionStatsHarmonizer h;
  h.residualize_ = opt.residualize;
  std::set<std::string> sites;
  for (std::size_t j : fit_subset) sites.insert(records[j].site);
  if (sites.size() < 2) {
    std::cerr << "harmonize: single site in fit subset, harmonization is a no-op\n";
    h.noop_ = true;
    return h;
  }

  const std::size_t f = means.extent(1);
  FeatureMatrix mfit, lfit;
  mfit.values = Tensor64({fit_subset.size(), f});
  lfit.values = Tensor64({fit_subset.size(), f});
  for (std::size_t k = 0; k < fit_subset.size(); ++k) {
    const std::size_t j = fit_subset[k];
    mfit.records.push_back(records[j]);
    lfit.records.push_back(records[j]);
    for (std::size_t c = 0; c < f; ++c) {
      mfit.values(k, c) = means(j, c);
      lfit.values(k, c) = log_stds(j, c);
    }
  }

  CombatOptions copt;
  copt.use_age = false;
  copt.use_sex = false;
  copt.use_label = opt.use_label;
  if (opt.residualize) {
    h.rmean_ = residualize_fit(mfit, opt.use_age, opt.use_sex);
    h.rlstd_ = residualize_fit(lfit, opt.use_age, opt.use_sex);
    mfit = residualize_apply(h.rmean_, mfit);
    lfit = residualize_apply(h.rlstd_, lfit);
  } else {
    copt.use_age = opt.use_age;
    copt.use_sex = opt.use_sex;
  }
  h.cmean_ = combat_fit(mfit, copt);
  h.clstd_ = combat_fit(lfit, copt);
  return h;
}

void RegionStatsHarmonizer::correct(const SubjectRecord& rec, std::vector<double>& means,
                                    std::vector<double>& log_stds) const {
  if (noop_) return;
  FeatureMatrix mm, ll;
  mm.records = {rec};
  ll.records = {rec};
  mm.values = Tensor64({1, means.size()});
  ll.values = Tensor64({1, log_stds.size()});
  for (std::size_t c = 0; c < means.size(); ++c) {
    mm.values(0, c) = means[c];
    ll.values(0, c) = log_stds[c];
  }
  if (residualize_) {
    mm = residualize_apply(rmean_, mm);
    ll = residualize_apply(rlstd_, ll);
  }
  mm = combat_apply(mm, cmean_);
  ll = combat_apply(ll, clstd_);
  for (std::size_t c = 0; c < means.size(); ++c) {
    means[c] = mm.values(0, c);
    log_stds[c] = ll.values(0, c);
  }
}

TimeseriesHarmonizer TimeseriesHarmonizer::fit(const std::vector<RoiTimeSeries>& ts,
                                               const std::vector<SubjectRecord>& records,
                                               const std::vector<std::size_t>& fit_subset,
                                               const HarmonizeOptions& opt) {
  if (ts.empty() || ts.size() != records.size())
    throw std::invalid_argument("harmonize_timeseries: record/series mismatch");
  const std::size_t n = ts[0].roi_count();
  Tensor64 means({ts.size(), n}), lstds({ts.size(), n});
  std::vector<double> m, l;
  for (std::size_t j = 0; j < ts.size(); ++j) {
    ts_stats(ts[j], m, l);
    for (std::size_t c = 0; c < n; ++c) {
      means(j, c) = m[c];
      lstds(j, c) = l[c];
    }
  }
  TimeseriesHarmonizer out;
  out.stats_ = RegionStatsHarmonizer::fit(means, lstds, records, fit_subset, opt);
  return out;
}

RoiTimeSeries TimeseriesHarmonizer::apply(const RoiTimeSeries& ts, const SubjectRecord& rec) const {
  if (stats_.is_noop()) return ts;
  std::vector<double> m, l;
  ts_stats(ts, m, l);
  std::vector<double> m2 = m, l2 = l;
  stats_.correct(rec, m2, l2);
  RoiTimeSeries out;
  out.data = Tensor(ts.data.shape());
  const std::size_t t = ts.time_points(), n = ts.roi_count();
  for (std::size_t r = 0; r < n; ++r) {
    const double scale = std::exp(l2[r] - l[r]);
    for (std::size_t i = 0; i < t; ++i)
      out.data(i, r) = static_cast<float>((ts.data(i, r) - m[r]) * scale + m2[r]);
  }
  return out;
}

PatchHarmonizer PatchHarmonizer::fit(const std::vector<RoiPatchSet>& patches,
                                     const std::vector<SubjectRecord>& records,
                                     const std::vector<std::size_t>& fit_subset,
                                     const HarmonizeOptions& opt) {
  if (patches.empty() || patches.size() != records.size())
    throw std::invalid_argument("harmonize_patches: record/set mismatch");
  const std::size_t n = patches[0].roi_count();
  Tensor64 means({patches.size(), n}), lstds({patches.size(), n});
  std::vector<double> m, l;
  for (std::size_t j = 0; j < patches.size(); ++j) {
    patch_stats(patches[j], m, l);
    for (std::size_t c = 0; c < n; ++c) {
      means(j, c) = m[c];
      lstds(j, c) = l[c];
    }
  }
  PatchHarmonizer out;
  out.stats_ = RegionStatsHarmonizer::fit(means, lstds, records, fit_subset, opt);
  return out;
}

RoiPatchSet PatchHarmonizer::apply(const RoiPatchSet& ps, const SubjectRecord& rec) const {
  if (stats_.is_noop()) return ps;
  std::vector<double> m, l;
  patch_stats(ps, m, l);
  std::vector<double> m2 = m, l2 = l;
  stats_.correct(rec, m2, l2);
  RoiPatchSet out;
  out.data = Tensor(ps.data.shape());
  const std::size_t n = ps.roi_count(), pv = ps.patch_volume();
  for (std::size_t r = 0; r < n; ++r) {
    const double scale = std::exp(l2[r] - l[r]);
    const float* src = ps.patch(r);
    float* dst = out.patch(r);
    for (std::size_t i = 0; i < pv; ++i)
      dst[i] = static_cast<float>((src[i] - m[r]) * scale + m2[r]);
  }
  return out;
}

std::vector<RoiTimeSeries> harmonize_timeseries(const std::vector<RoiTimeSeries>& ts,
                                                const std::vector<SubjectRecord>& records,
                                                const HarmonizeOptions& opt) {
  std::vector<std::size_t> all(ts.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const TimeseriesHarmonizer h = TimeseriesHarmonizer::fit(ts, records, all, opt);
  std::vector<RoiTimeSeries> out;
  out.reserve(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) out.push_back(h.apply(ts[i], records[i]));
  return out;
}

}  // namespace nfuse
