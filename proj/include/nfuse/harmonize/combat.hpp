#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nfuse/dataio/cohort.hpp"
#include "nfuse/numerics/tensor.hpp"

namespace nfuse {

// Subjects x features, rows aligned with the record list.
struct FeatureMatrix {
  Tensor64 values;
  std::vector<SubjectRecord> records;

  std::size_t n_subjects() const { return values.extent(0); }
  std::size_t n_features() const { return values.extent(1); }
};

// Per-feature OLS fit on [1, age, sex]; apply() returns the residuals with
// the intercept re-added, i.e. only the covariate trends are removed.
struct ResidualizerModel {
  bool use_age = true;
  bool use_sex = true;
  Tensor64 coef;  // (1 + n_cov) x F, row 0 = intercept
};

ResidualizerModel residualize_fit(const FeatureMatrix& m, bool use_age = true, bool use_sex = true);
FeatureMatrix residualize_apply(const ResidualizerModel& model, const FeatureMatrix& m);
FeatureMatrix residualize_covariates(const FeatureMatrix& m);  // fit + apply

struct CombatSite {
  std::string id;
  std::size_t n_subjects = 0;
  std::vector<double> gamma;  // additive site effect, standardized units
  std::vector<double> delta;  // multiplicative site effect (> 0)
};

struct CombatModel {
  std::vector<double> alpha;                  // overall mean per feature
  std::vector<std::vector<double>> beta;      // one row per covariate
  std::vector<std::string> covariate_names;   // subset of {age, sex, label}
  std::vector<CombatSite> sites;              // sorted by site id
  std::vector<double> pooled_var;             // per feature

  const CombatSite* find_site(const std::string& id) const;
};

struct CombatOptions {
  bool use_age = false;
  bool use_sex = false;
  bool use_label = false;  // protect the class effect via the covariate design
  double convergence = 1e-6;
  int max_iterations = 500;
};

// Parametric empirical-Bayes fit: standardize, estimate per-site
// location/scale, shrink with a normal prior on gamma and an inverse-gamma
// prior on delta^2, iterated to convergence.
CombatModel combat_fit(const FeatureMatrix& m, const CombatOptions& opt = {});

// (standardized - gamma_i) / delta_i, then de-standardized. Covariate
// effects in the model are re-added, so biological signal is preserved.
FeatureMatrix combat_apply(const FeatureMatrix& m, const CombatModel& model);

void save_combat_model(const std::filesystem::path& path, const CombatModel& model);
CombatModel load_combat_model(const std::filesystem::path& path);

}  // namespace nfuse
