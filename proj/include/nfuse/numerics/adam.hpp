#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nfuse/numerics/params.hpp"
#include "nfuse/numerics/tensor.hpp"

namespace nfuse {

struct AdamConfig {
  double learning_rate = 1e-3;
  double weight_decay = 0.0;  // coupled L2: added to the gradient before the moments
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moment buffers shape-match the parameters they
// track; the step counter is shared and strictly increasing.
template <class T>
class AdamState {
 public:
  AdamState(const ParamSet<T>& params, AdamConfig cfg) : cfg_(cfg) {
    for (const auto& p : params) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  }

  const AdamConfig& config() const { return cfg_; }
  long step_count() const { return step_; }

  void step(ParamSet<T>& params) {
    if (params.count() != m_.size())
      throw std::invalid_argument("adam: parameter set does not match state");
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t pi = 0; pi < params.count(); ++pi) {
      Param<T>& p = params.at(pi);
      if (!p.value.same_shape(m_[pi]))
        throw std::invalid_argument("adam: shape mismatch for " + p.name);
      TensorT<T>& m = m_[pi];
      TensorT<T>& v = v_[pi];
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = static_cast<double>(p.grad[i]) +
                         cfg_.weight_decay * static_cast<double>(p.value[i]);
        const double mi = cfg_.beta1 * static_cast<double>(m[i]) + (1.0 - cfg_.beta1) * g;
        const double vi = cfg_.beta2 * static_cast<double>(v[i]) + (1.0 - cfg_.beta2) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double mhat = mi / bc1;
        const double vhat = vi / bc2;
        p.value[i] = static_cast<T>(static_cast<double>(p.value[i]) -
                                    cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon));
      }
    }
  }

 private:
  AdamConfig cfg_;
  long step_ = 0;
  std::vector<TensorT<T>> m_;
  std::vector<TensorT<T>> v_;
};

}  // namespace nfuse
