#include "nfuse/numerics/grad_check.hpp"

#include <cmath>
#include <stdexcept>

namespace nfuse {

GradCheckResult grad_check(const std::function<double(const std::vector<double>&)>& f,
                           const std::vector<double>& analytic_grad,
                           std::vector<double> point, double perturbation) {
  if (analytic_grad.size() != point.size())
    throw std::invalid_argument("grad_check: gradient/point size mismatch");
  GradCheckResult res;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + perturbation;
    const double fp = f(point);
    point[i] = saved - perturbation;
    const double fm = f(point);
    point[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("grad_check: non-finite intermediate value");
    const double fd = (fp - fm) / (2.0 * perturbation);
    const double an = analytic_grad[i];
    const double denom = std::max({1.0, std::fabs(fd), std::fabs(an)});
    const double err = std::fabs(fd - an) / denom;
    if (err > res.max_rel_error) {
      res.max_rel_error = err;
      res.worst_coordinate = i;
      res.fd_at_worst = fd;
      res.analytic_at_worst = an;
    }
  }
  return res;
}

}  // namespace nfuse
