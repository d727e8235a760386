#pragma once

#include <cmath>
#include <random>

#include "nfuse/numerics/params.hpp"
#include "nfuse/numerics/rng.hpp"

namespace nfuse {

// Fan-based uniform (Glorot) init for linear maps; N(0,1)/sqrt(d) for
// token/positional tables.
template <class T>
void init_glorot(TensorT<T>& w, std::size_t fan_out, std::size_t fan_in, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<T>(u(rng));
}

template <class T>
void init_scaled_normal(TensorT<T>& w, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<T>(n(rng) * s);
}

}  // namespace nfuse
