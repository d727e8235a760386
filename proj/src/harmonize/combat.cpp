#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "nfuse/harmonize/combat.hpp"

namespace nfuse {

using nlohmann::json;

namespace {

std::vector<double> covariate_row(const SubjectRecord& r, const CombatOptions& opt) {
  std::vector<double> x;
  if (opt.use_age) x.push_back(r.age);
  if (opt.use_sex) x.push_back(static_cast<double>(r.sex));
  if (opt.use_label) x.push_back(static_cast<double>(r.label));
  return x;
}

std::vector<double> covariate_row(const SubjectRecord& r, const std::vector<std::string>& names) {
  std::vector<double> x;
  for (const auto& n : names) {
    if (n == "age") x.push_back(r.age);
    else if (n == "sex") x.push_back(static_cast<double>(r.sex));
    else if (n == "label") x.push_back(static_cast<double>(r.label));
    else throw std::invalid_argument("combat: unknown covariate " + n);
  }
  return x;
}

// Gaussian elimination with partial pivoting, multi-RHS.
void solve_dense(std::vector<double> a, std::vector<std::vector<double>>& rhs, std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
    if (std::fabs(a[piv * n + col]) < 1e-12)
      throw std::invalid_argument("combat: singular design matrix");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      for (auto& b : rhs) std::swap(b[piv], b[col]);
    }
    const double d = a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / d;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      for (auto& b : rhs) b[r] -= f * b[col];
    }
  }
  for (auto& b : rhs) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = b[ii];
      for (std::size_t c = ii + 1; c < n; ++c) s -= a[ii * n + c] * b[c];
      b[ii] = s / a[ii * n + ii];
    }
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_unbiased(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

const CombatSite* CombatModel::find_site(const std::string& id) const {
  for (const auto& s : sites)
    if (s.id == id) return &s;
  return nullptr;
}

CombatModel combat_fit(const FeatureMatrix& m, const CombatOptions& opt) {
  const std::size_t s = m.n_subjects(), f = m.n_features();
  if (m.records.size() != s) throw std::invalid_argument("combat: record/row mismatch");
  if (f < 2) throw std::invalid_argument("combat: needs >= 2 features");

  // Site roster sorted by id: fit is invariant to subject order.
  std::map<std::string, std::vector<std::size_t>> site_members;
  for (std::size_t j = 0; j < s; ++j) site_members[m.records[j].site].push_back(j);
  const std::size_t b = site_members.size();
  if (b < 2) throw std::invalid_argument("combat: needs >= 2 sites");
  for (const auto& [id, members] : site_members)
    if (members.size() < 3)
      throw std::invalid_argument("combat: site " + id + " has fewer than 3 subjects");

  std::vector<std::string> site_ids;
  std::vector<std::size_t> site_of(s, 0);
  {
    std::size_t i = 0;
    for (const auto& [id, members] : site_members) {
      site_ids.push_back(id);
      for (std::size_t j : members) site_of[j] = i;
      ++i;
    }
  }

  CombatModel model;
  if (opt.use_age) model.covariate_names.push_back("age");
  if (opt.use_sex) model.covariate_names.push_back("sex");
  if (opt.use_label) model.covariate_names.push_back("label");
  const std::size_t c = model.covariate_names.size();
  const std::size_t p = b + c;

  // Least squares with one-hot site columns followed by covariates.
  std::vector<std::vector<double>> design(s);
  for (std::size_t j = 0; j < s; ++j) {
    design[j].assign(p, 0.0);
    design[j][site_of[j]] = 1.0;
    const auto cov = covariate_row(m.records[j], opt);
    for (std::size_t a = 0; a < c; ++a) design[j][b + a] = cov[a];
  }
  std::vector<double> gram(p * p, 0.0);
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t r = 0; r < p; ++r)
      for (std::size_t q = 0; q < p; ++q) gram[r * p + q] += design[j][r] * design[j][q];
  std::vector<std::vector<double>> rhs(f, std::vector<double>(p, 0.0));
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t feat = 0; feat < f; ++feat)
      for (std::size_t r = 0; r < p; ++r) rhs[feat][r] += design[j][r] * m.values(j, feat);
  solve_dense(gram, rhs, p);  // rhs[feat] now holds the coefficient vector

  // Grand mean: subject-weighted combination of per-site intercepts.
  model.alpha.assign(f, 0.0);
  for (std::size_t feat = 0; feat < f; ++feat) {
    double a = 0.0;
    for (std::size_t i = 0; i < b; ++i)
      a += rhs[feat][i] * static_cast<double>(site_members.at(site_ids[i]).size()) /
           static_cast<double>(s);
    model.alpha[feat] = a;
  }
  model.beta.assign(c, std::vector<double>(f, 0.0));
  for (std::size_t a = 0; a < c; ++a)
    for (std::size_t feat = 0; feat < f; ++feat) model.beta[a][feat] = rhs[feat][b + a];

  model.pooled_var.assign(f, 0.0);
  for (std::size_t feat = 0; feat < f; ++feat) {
    double acc = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      double fit = 0.0;
      for (std::size_t r = 0; r < p; ++r) fit += design[j][r] * rhs[feat][r];
      const double e = m.values(j, feat) - fit;
      acc += e * e;
    }
    model.pooled_var[feat] = acc / static_cast<double>(s);
    if (model.pooled_var[feat] < 1e-12)
      throw std::invalid_argument("combat: zero pooled variance in feature " + std::to_string(feat));
  }

  // Standardize and estimate per-site location/scale.
  Tensor64 z({s, f});
  for (std::size_t j = 0; j < s; ++j) {
    const auto cov = covariate_row(m.records[j], opt);
    for (std::size_t feat = 0; feat < f; ++feat) {
      double sm = model.alpha[feat];
      for (std::size_t a = 0; a < c; ++a) sm += cov[a] * model.beta[a][feat];
      z(j, feat) = (m.values(j, feat) - sm) / std::sqrt(model.pooled_var[feat]);
    }
  }

  for (std::size_t i = 0; i < b; ++i) {
    const auto& members = site_members.at(site_ids[i]);
    const std::size_t ni = members.size();
    std::vector<double> gamma_hat(f, 0.0), delta2_hat(f, 0.0);
    for (std::size_t feat = 0; feat < f; ++feat) {
      double mu = 0.0;
      for (std::size_t j : members) mu += z(j, feat);
      mu /= static_cast<double>(ni);
      double v = 0.0;
      for (std::size_t j : members) v += (z(j, feat) - mu) * (z(j, feat) - mu);
      v /= static_cast<double>(ni - 1);
      gamma_hat[feat] = mu;
      delta2_hat[feat] = v;
    }

    // Hyperpriors from the across-feature moments.
    const double gamma_bar = mean_of(gamma_hat);
    const double tau2 = var_unbiased(gamma_hat);
    const double dmean = mean_of(delta2_hat);
    const double dvar = var_unbiased(delta2_hat);

    std::vector<double> g_star = gamma_hat, d2_star = delta2_hat;
    if (tau2 > 1e-12 && dvar > 1e-12) {
      const double aprior = (2.0 * dvar + dmean * dmean) / dvar;
      const double bprior = (dmean * dvar + dmean * dmean * dmean) / dvar;
      for (int it = 0; it < opt.max_iterations; ++it) {
        double change = 0.0;
        for (std::size_t feat = 0; feat < f; ++feat) {
          const double g_new = (static_cast<double>(ni) * tau2 * gamma_hat[feat] +
                                d2_star[feat] * gamma_bar) /
                               (static_cast<double>(ni) * tau2 + d2_star[feat]);
          double ss = 0.0;
          for (std::size_t j : site_members.at(site_ids[i]))
            ss += (z(j, feat) - g_new) * (z(j, feat) - g_new);
          const double d_new = (bprior + 0.5 * ss) / (static_cast<double>(ni) / 2.0 + aprior - 1.0);
          change = std::max(change, std::fabs(g_new - g_star[feat]) / std::max(1.0, std::fabs(g_star[feat])));
          change = std::max(change, std::fabs(d_new - d2_star[feat]) / std::max(1.0, std::fabs(d2_star[feat])));
          g_star[feat] = g_new;
          d2_star[feat] = d_new;
        }
        if (change < opt.convergence) break;
      }
    }

    CombatSite site;
    site.id = site_ids[i];
    site.n_subjects = ni;
    site.gamma = std::move(g_star);
    site.delta.resize(f);
    for (std::size_t feat = 0; feat < f; ++feat) site.delta[feat] = std::sqrt(std::max(d2_star[feat], 1e-12));
    model.sites.push_back(std::move(site));
  }
  return model;
}

FeatureMatrix combat_apply(const FeatureMatrix& m, const CombatModel& model) {
  const std::size_t s = m.n_subjects(), f = m.n_features();
  if (model.alpha.size() != f) throw std::invalid_argument("combat_apply: feature count mismatch");
  FeatureMatrix out;
  out.records = m.records;
  out.values = Tensor64({s, f});
  for (std::size_t j = 0; j < s; ++j) {
    const CombatSite* site = model.find_site(m.records[j].site);
    if (!site)
      throw std::invalid_argument("combat_apply: unknown site id " + m.records[j].site);
    const auto cov = covariate_row(m.records[j], model.covariate_names);
    for (std::size_t feat = 0; feat < f; ++feat) {
      double sm = model.alpha[feat];
      for (std::size_t a = 0; a < cov.size(); ++a) sm += cov[a] * model.beta[a][feat];
      const double sd = std::sqrt(model.pooled_var[feat]);
      const double z = (m.values(j, feat) - sm) / sd;
      const double adj = (z - site->gamma[feat]) / site->delta[feat];
      out.values(j, feat) = adj * sd + sm;
    }
  }
  return out;
}

void save_combat_model(const std::filesystem::path& path, const CombatModel& model) {
  json sites = json::array();
  for (const auto& s : model.sites)
    sites.push_back({{"id", s.id}, {"n", s.n_subjects}, {"gamma", s.gamma}, {"delta", s.delta}});
  json j{{"alpha", model.alpha},
         {"beta", model.beta},
         {"covariate_names", model.covariate_names},
         {"sites", sites},
         {"pooled_var", model.pooled_var}};
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("combat: cannot open " + tmp.string());
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

CombatModel load_combat_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("combat: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("combat: parse error in " + path.string() + ": " + e.what());
  }
  CombatModel model;
  model.alpha = j.at("alpha").get<std::vector<double>>();
  model.beta = j.at("beta").get<std::vector<std::vector<double>>>();
  model.covariate_names = j.value("covariate_names", std::vector<std::string>{});
  model.pooled_var = j.at("pooled_var").get<std::vector<double>>();
  for (const auto& sj : j.at("sites")) {
    CombatSite s;
    s.id = sj.at("id").get<std::string>();
    s.n_subjects = sj.value("n", std::size_t(0));
    s.gamma = sj.at("gamma").get<std::vector<double>>();
    s.delta = sj.at("delta").get<std::vector<double>>();
    model.sites.push_back(std::move(s));
  }
  return model;
}

}  // namespace nfuse
