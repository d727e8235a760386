#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace nfuse {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_coordinate = 0;
  double fd_at_worst = 0.0;
  double analytic_at_worst = 0.0;
};

// Central-difference check of an analytic gradient at `point`.
// `f` evaluates the scalar objective; `analytic_grad` is its hand-written
// gradient at the same point. Per coordinate the error is
// |g_fd - g_an| / max(1, |g_fd|, |g_an|). Throws on non-finite intermediates.
// Run at 64-bit only; perturbation default 1e-5.
GradCheckResult grad_check(const std::function<double(const std::vector<double>&)>& f,
                           const std::vector<double>& analytic_grad,
                           std::vector<double> point, double perturbation = 1e-5);

}  // namespace nfuse
