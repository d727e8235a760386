#pragma once

#include <vector>

#include "nfuse/dataio/cohort.hpp"
#include "nfuse/dataio/patches.hpp"
#include "nfuse/harmonize/combat.hpp"

namespace nfuse {

struct HarmonizeOptions {
  bool use_age = true;
  bool use_sex = true;
  bool use_label = false;
  bool residualize = true;
};

// Harmonizes per-(subject, ROI) summary statistics (mean and log-std) with
// residualize + ComBat, then broadcasts the per-ROI affine correction across
// the region's raw samples. Fit on a training subset; apply anywhere.
// With a single site the whole transform is the identity (gamma/delta are
// unidentifiable) and a warning is emitted.
class RegionStatsHarmonizer {
 public:
  static RegionStatsHarmonizer fit(const Tensor64& means, const Tensor64& log_stds,
                                   const std::vector<SubjectRecord>& records,
                                   const std::vector<std::size_t>& fit_subset,
                                   const HarmonizeOptions& opt = {});

  bool is_noop() const { return noop_; }

  // In-place correction of one subject's per-ROI stats.
  void correct(const SubjectRecord& rec, std::vector<double>& means,
               std::vector<double>& log_stds) const;

 private:
  bool noop_ = false;
  bool residualize_ = true;
  ResidualizerModel rmean_, rlstd_;
  CombatModel cmean_, clstd_;
};

class TimeseriesHarmonizer {
 public:
  static TimeseriesHarmonizer fit(const std::vector<RoiTimeSeries>& ts,
                                  const std::vector<SubjectRecord>& records,
                                  const std::vector<std::size_t>& fit_subset,
                                  const HarmonizeOptions& opt = {});
  RoiTimeSeries apply(const RoiTimeSeries& ts, const SubjectRecord& rec) const;
  bool is_noop() const { return stats_.is_noop(); }

 private:
  RegionStatsHarmonizer stats_;
};

class PatchHarmonizer {
 public:
  static PatchHarmonizer fit(const std::vector<RoiPatchSet>& patches,
                             const std::vector<SubjectRecord>& records,
                             const std::vector<std::size_t>& fit_subset,
                             const HarmonizeOptions& opt = {});
  RoiPatchSet apply(const RoiPatchSet& ps, const SubjectRecord& rec) const;
  bool is_noop() const { return stats_.is_noop(); }

 private:
  RegionStatsHarmonizer stats_;
};

// One-shot form: fit on the full set and apply to every subject.
std::vector<RoiTimeSeries> harmonize_timeseries(const std::vector<RoiTimeSeries>& ts,
                                                const std::vector<SubjectRecord>& records,
                                                const HarmonizeOptions& opt = {});

}  // namespace nfuse
