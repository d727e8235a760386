#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfuse/numerics/tensor.hpp"

namespace nfuse {

template <class T>
struct Param {
  std::string name;
  TensorT<T> value;
  TensorT<T> grad;
};

// Named parameters with paired gradient buffers. Registration order is
// stable and defines the optimizer/checkpoint/grad-check ordering.
template <class T>
class ParamSet {
 public:
  Param<T>& add(std::string name, std::vector<std::size_t> shape) {
    for (const auto& p : items_)
      if (p->name == name) throw std::invalid_argument("duplicate parameter: " + name);
    auto p = std::make_unique<Param<T>>();
    p->name = std::move(name);
    p->value = TensorT<T>(shape);
    p->grad = TensorT<T>(std::move(shape));
    items_.push_back(std::move(p));
    return *items_.back();
  }

  std::size_t count() const { return items_.size(); }
  Param<T>& at(std::size_t i) { return *items_[i]; }
  const Param<T>& at(std::size_t i) const { return *items_[i]; }

  Param<T>* find(const std::string& name) {
    for (auto& p : items_)
      if (p->name == name) return p.get();
    return nullptr;
  }

  void zero_grads() {
    for (auto& p : items_) p->grad.fill(T(0));
  }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& p : items_) n += p->value.size();
    return n;
  }

  std::vector<double> flatten_values() const {
    std::vector<double> out;
    out.reserve(total_size());
    for (const auto& p : items_)
      for (std::size_t i = 0; i < p->value.size(); ++i)
        out.push_back(static_cast<double>(p->value[i]));
    return out;
  }

  std::vector<double> flatten_grads() const {
    std::vector<double> out;
    out.reserve(total_size());
    for (const auto& p : items_)
      for (std::size_t i = 0; i < p->grad.size(); ++i)
        out.push_back(static_cast<double>(p->grad[i]));
    return out;
  }

  void set_values(const std::vector<double>& flat) {
    std::size_t k = 0;
    for (auto& p : items_)
      for (std::size_t i = 0; i < p->value.size(); ++i)
        p->value[i] = static_cast<T>(flat[k++]);
    if (k != flat.size()) throw std::invalid_argument("set_values: size mismatch");
  }

  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

 private:
  std::vector<std::unique_ptr<Param<T>>> items_;
};

}  // namespace nfuse
