#include <cmath>
#include <stdexcept>

#include "nfuse/harmonize/combat.hpp"

namespace nfuse {

namespace {

// Solve the symmetric positive definite system G x = b in place (Cholesky).
// Throws on rank deficiency.
void solve_spd(std::vector<double>& g, std::vector<double>& b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = g[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= g[i * n + k] * g[j * n + k];
      if (i == j) {
        if (s <= 1e-10) throw std::invalid_argument("residualize: rank-deficient design");
        g[i * n + i] = std::sqrt(s);
      } else {
        g[i * n + j] = s / g[j * n + j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= g[i * n + k] * b[k];
    b[i] = s / g[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= g[k * n + ii] * b[k];
    b[ii] = s / g[ii * n + ii];
  }
}

std::vector<double> design_row(const SubjectRecord& r, bool use_age, bool use_sex) {
  std::vector<double> x{1.0};
  if (use_age) x.push_back(r.age);
  if (use_sex) x.push_back(static_cast<double>(r.sex));
  return x;
}

}  // namespace

ResidualizerModel residualize_fit(const FeatureMatrix& m, bool use_age, bool use_sex) {
  const std::size_t s = m.n_subjects(), f = m.n_features();
  if (s < 3) throw std::invalid_argument("residualize: needs >= 3 subjects");
  if (m.records.size() != s) throw std::invalid_argument("residualize: record/row mismatch");
  const std::size_t p = 1 + (use_age ? 1 : 0) + (use_sex ? 1 : 0);

  // Gram matrix of the design, shared across features.
  std::vector<double> gram(p * p, 0.0);
  for (std::size_t j = 0; j < s; ++j) {
    const auto x = design_row(m.records[j], use_age, use_sex);
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) gram[a * p + b] += x[a] * x[b];
  }

  ResidualizerModel model;
  model.use_age = use_age;
  model.use_sex = use_sex;
  model.coef = Tensor64({p, f});
  for (std::size_t feat = 0; feat < f; ++feat) {
    std::vector<double> rhs(p, 0.0);
    for (std::size_t j = 0; j < s; ++j) {
      const auto x = design_row(m.records[j], use_age, use_sex);
      for (std::size_t a = 0; a < p; ++a) rhs[a] += x[a] * m.values(j, feat);
    }
    std::vector<double> g = gram;
    solve_spd(g, rhs, p);
    for (std::size_t a = 0; a < p; ++a) model.coef(a, feat) = rhs[a];
  }
  return model;
}

FeatureMatrix residualize_apply(const ResidualizerModel& model, const FeatureMatrix& m) {
  const std::size_t s = m.n_subjects(), f = m.n_features();
  if (model.coef.extent(1) != f) throw std::invalid_argument("residualize: feature count mismatch");
  FeatureMatrix out;
  out.records = m.records;
  out.values = Tensor64({s, f});
  for (std::size_t j = 0; j < s; ++j) {
    const auto x = design_row(m.records[j], model.use_age, model.use_sex);
    for (std::size_t feat = 0; feat < f; ++feat) {
      double trend = 0.0;  // covariate part only; the intercept stays in
      for (std::size_t a = 1; a < x.size(); ++a) trend += x[a] * model.coef(a, feat);
      out.values(j, feat) = m.values(j, feat) - trend;
    }
  }
  return out;
}

FeatureMatrix residualize_covariates(const FeatureMatrix& m) {
  return residualize_apply(residualize_fit(m), m);
}

}  // namespace nfuse
