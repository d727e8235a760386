#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "nfuse/kernels/kernels.hpp"
#include "nfuse/numerics/tensor.hpp"

// Forward and backward passes for every differentiable operation in the
// model. Backward passes are hand-written and accumulate into caller-owned
// gradient tensors; there is no graph engine.

namespace nfuse::ops {

template <class T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0))
    throw std::invalid_argument("matmul: shape mismatch " + shape_str(a.shape()) +
                                " x " + shape_str(b.shape()));
  TensorT<T> c({a.extent(0), b.extent(1)});
  kern::gemm_nn(a.extent(0), b.extent(1), a.extent(1), a.data(), b.data(), c.data(), false);
  return c;
}

// dA += dC * B^T, dB += A^T * dC. Either output may be null.
template <class T>
void matmul_backward(const TensorT<T>& a, const TensorT<T>& b, const TensorT<T>& dc,
                     TensorT<T>* da, TensorT<T>* db) {
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  if (dc.extent(0) != m || dc.extent(1) != n)
    throw std::invalid_argument("matmul_backward: gradient shape mismatch");
  if (da) kern::gemm_nt(m, k, n, dc.data(), b.data(), da->data(), true);
  if (db) kern::gemm_tn(k, n, m, a.data(), dc.data(), db->data(), true);
}

// y(rows x out) = x(rows x in) * W(out x in)^T + bias
template <class T>
TensorT<T> linear(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>* bias = nullptr) {
  const std::size_t rows = x.extent(0), in = x.extent(1), out = w.extent(0);
  if (w.extent(1) != in)
    throw std::invalid_argument("linear: weight width " + shape_str(w.shape()) +
                                " does not match input " + shape_str(x.shape()));
  TensorT<T> y({rows, out});
  kern::gemm_nt(rows, out, in, x.data(), w.data(), y.data(), false);
  if (bias) {
    if (bias->size() != out) throw std::invalid_argument("linear: bias size mismatch");
    for (std::size_t r = 0; r < rows; ++r) kern::axpy(out, T(1), bias->data(), y.row(r));
  }
  return y;
}

template <class T>
void linear_backward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& dy,
                     TensorT<T>* dx, TensorT<T>& dw, TensorT<T>* db = nullptr) {
  const std::size_t rows = x.extent(0), in = x.extent(1), out = w.extent(0);
  if (dx) kern::gemm_nn(rows, in, out, dy.data(), w.data(), dx->data(), true);
  kern::gemm_tn(out, in, rows, dy.data(), x.data(), dw.data(), true);
  if (db)
    for (std::size_t r = 0; r < rows; ++r) kern::axpy(out, T(1), dy.row(r), db->data());
}

namespace detail {
inline void axis_strides(const std::vector<std::size_t>& shape, int axis,
                         std::size_t& outer, std::size_t& extent, std::size_t& inner) {
  const int rank = static_cast<int>(shape.size());
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) throw std::invalid_argument("axis out of range");
  outer = 1;
  inner = 1;
  for (int i = 0; i < axis; ++i) outer *= shape[i];
  extent = shape[axis];
  for (int i = axis + 1; i < rank; ++i) inner *= shape[i];
}
}  // namespace detail

// Max-subtracted softmax along `axis`. Each slice sums to 1.
template <class T>
TensorT<T> softmax(const TensorT<T>& x, int axis = -1) {
  std::size_t outer, extent, inner;
  detail::axis_strides(x.shape(), axis, outer, extent, inner);
  TensorT<T> y(x.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * extent * inner + i;
      T mx = x[base];
      for (std::size_t e = 1; e < extent; ++e) mx = std::max(mx, x[base + e * inner]);
      T total = T(0);
      for (std::size_t e = 0; e < extent; ++e) {
        const T v = std::exp(x[base + e * inner] - mx);
        y[base + e * inner] = v;
        total += v;
      }
      const T norm = T(1) / total;
      for (std::size_t e = 0; e < extent; ++e) y[base + e * inner] *= norm;
    }
  }
  return y;
}

// dx from y = softmax(x) and dy: dx_e = y_e * (dy_e - sum_f dy_f y_f)
template <class T>
TensorT<T> softmax_backward(const TensorT<T>& y, const TensorT<T>& dy, int axis = -1) {
  std::size_t outer, extent, inner;
  detail::axis_strides(y.shape(), axis, outer, extent, inner);
  TensorT<T> dx(y.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * extent * inner + i;
      T s = T(0);
      for (std::size_t e = 0; e < extent; ++e) s += dy[base + e * inner] * y[base + e * inner];
      for (std::size_t e = 0; e < extent; ++e) {
        const std::size_t ix = base + e * inner;
        dx[ix] = y[ix] * (dy[ix] - s);
      }
    }
  }
  return dx;
}

template <class T>
struct LayerNormCache {
  TensorT<T> xhat;
  std::vector<T> inv_std;  // one per row
};

// Row-wise layer norm over the last axis: y = gain * (x - mean) / sqrt(var + eps) + bias.
// Population variance; eps guards constant rows.
template <class T>
TensorT<T> layer_norm(const TensorT<T>& x, const TensorT<T>& gain, const TensorT<T>& bias,
                      T eps, LayerNormCache<T>* cache = nullptr) {
  const std::size_t d = x.shape().back();
  if (d < 2) throw std::invalid_argument("layer_norm: normalization extent must be >= 2");
  if (gain.size() != d || bias.size() != d)
    throw std::invalid_argument("layer_norm: affine size mismatch");
  const std::size_t rows = x.size() / d;
  TensorT<T> y(x.shape());
  if (cache) {
    cache->xhat = TensorT<T>(x.shape());
    cache->inv_std.assign(rows, T(0));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * d;
    T* yr = y.data() + r * d;
    T mean = kern::sum(d, xr) / T(d);
    T var = T(0);
    for (std::size_t j = 0; j < d; ++j) {
      const T c = xr[j] - mean;
      var += c * c;
    }
    var /= T(d);
    const T inv = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      const T xh = (xr[j] - mean) * inv;
      yr[j] = gain[j] * xh + bias[j];
      if (cache) cache->xhat[r * d + j] = xh;
    }
    if (cache) cache->inv_std[r] = inv;
  }
  return y;
}

template <class T>
TensorT<T> layer_norm_backward(const TensorT<T>& dy, const LayerNormCache<T>& cache,
                               const TensorT<T>& gain, TensorT<T>* dgain, TensorT<T>* dbias) {
  const std::size_t d = dy.shape().back();
  const std::size_t rows = dy.size() / d;
  TensorT<T> dx(dy.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* dyr = dy.data() + r * d;
    const T* xh = cache.xhat.data() + r * d;
    T* dxr = dx.data() + r * d;
    T mean_dxhat = T(0), mean_dxhat_xhat = T(0);
    for (std::size_t j = 0; j < d; ++j) {
      const T dxh = dyr[j] * gain[j];
      mean_dxhat += dxh;
      mean_dxhat_xhat += dxh * xh[j];
    }
    mean_dxhat /= T(d);
    mean_dxhat_xhat /= T(d);
    const T inv = cache.inv_std[r];
    for (std::size_t j = 0; j < d; ++j) {
      const T dxh = dyr[j] * gain[j];
      dxr[j] = inv * (dxh - mean_dxhat - xh[j] * mean_dxhat_xhat);
    }
    if (dgain)
      for (std::size_t j = 0; j < d; ++j) (*dgain)[j] += dyr[j] * xh[j];
    if (dbias)
      for (std::size_t j = 0; j < d; ++j) (*dbias)[j] += dyr[j];
  }
  return dx;
}

template <class T>
TensorT<T> relu(const TensorT<T>& x) {
  TensorT<T> y(x.shape());
  kern::relu_fwd(x.size(), x.data(), y.data());
  return y;
}

template <class T>
TensorT<T> relu_backward(const TensorT<T>& x, const TensorT<T>& dy) {
  TensorT<T> dx(x.shape());
  kern::relu_bwd(x.size(), x.data(), dy.data(), dx.data());
  return dx;
}

template <class T>
TensorT<T> leaky_relu(const TensorT<T>& x, T slope = T(0.2)) {
  TensorT<T> y(x.shape());
  kern::leaky_relu_fwd(x.size(), slope, x.data(), y.data());
  return y;
}

template <class T>
TensorT<T> leaky_relu_backward(const TensorT<T>& x, const TensorT<T>& dy, T slope = T(0.2)) {
  TensorT<T> dx(x.shape());
  kern::leaky_relu_bwd(x.size(), slope, x.data(), dy.data(), dx.data());
  return dx;
}

template <class T>
TensorT<T> elu(const TensorT<T>& x, T alpha = T(1)) {
  TensorT<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = x[i] > T(0) ? x[i] : alpha * (std::exp(x[i]) - T(1));
  return y;
}

template <class T>
TensorT<T> elu_backward(const TensorT<T>& x, const TensorT<T>& dy, T alpha = T(1)) {
  TensorT<T> dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i)
    dx[i] = x[i] > T(0) ? dy[i] : dy[i] * alpha * std::exp(x[i]);
  return dx;
}

// Exact (erf-based) GELU.
template <class T>
TensorT<T> gelu(const TensorT<T>& x) {
  TensorT<T> y(x.shape());
  const T inv_sqrt2 = T(0.7071067811865475244);
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = T(0.5) * x[i] * (T(1) + std::erf(x[i] * inv_sqrt2));
  return y;
}

template <class T>
TensorT<T> gelu_backward(const TensorT<T>& x, const TensorT<T>& dy) {
  TensorT<T> dx(x.shape());
  const T inv_sqrt2 = T(0.7071067811865475244);
  const T inv_sqrt2pi = T(0.3989422804014326779);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T cdf = T(0.5) * (T(1) + std::erf(x[i] * inv_sqrt2));
    const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * x[i] * x[i]);
    dx[i] = dy[i] * (cdf + x[i] * pdf);
  }
  return dx;
}

// Inverted dropout: zero with probability `rate`, scale survivors by 1/(1-rate).
// Identity in eval mode. The survivor mask is returned for the backward pass.
template <class T>
TensorT<T> dropout(const TensorT<T>& x, double rate, bool training, std::mt19937_64& rng,
                   std::vector<std::uint8_t>* mask_out = nullptr) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  if (!training || rate == 0.0) {
    if (mask_out) mask_out->assign(x.size(), 1);
    return x;
  }
  std::bernoulli_distribution keep(1.0 - rate);
  const T inv_keep = T(1.0 / (1.0 - rate));
  TensorT<T> y(x.shape());
  if (mask_out) mask_out->assign(x.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (keep(rng)) {
      y[i] = x[i] * inv_keep;
      if (mask_out) (*mask_out)[i] = 1;
    } else {
      y[i] = T(0);
    }
  }
  return y;
}

template <class T>
TensorT<T> dropout_backward(const TensorT<T>& dy, double rate,
                            const std::vector<std::uint8_t>& mask) {
  if (rate == 0.0) return dy;
  const T inv_keep = T(1.0 / (1.0 - rate));
  TensorT<T> dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = mask[i] ? dy[i] * inv_keep : T(0);
  return dx;
}

template <class T>
struct CrossEntropyResult {
  double loss = 0.0;      // mean negative log-likelihood
  TensorT<T> dlogits;     // (softmax - onehot) / batch
  TensorT<T> probs;
};

// Log-sum-exp cross entropy over logits rows. One label per row.
template <class T>
CrossEntropyResult<T> cross_entropy_with_softmax(const TensorT<T>& logits,
                                                 const std::vector<int>& labels) {
  const std::size_t b = logits.extent(0), c = logits.extent(1);
  if (labels.size() != b)
    throw std::invalid_argument("cross_entropy: one label per logit row required");
  CrossEntropyResult<T> res;
  res.dlogits = TensorT<T>({b, c});
  res.probs = TensorT<T>({b, c});
  double total = 0.0;
  for (std::size_t r = 0; r < b; ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= c)
      throw std::invalid_argument("cross_entropy: label out of range");
    const T* lr = logits.row(r);
    T mx = lr[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, lr[j]);
    double lse = 0.0;
    for (std::size_t j = 0; j < c; ++j) lse += std::exp(static_cast<double>(lr[j] - mx));
    lse = std::log(lse) + static_cast<double>(mx);
    total += lse - static_cast<double>(lr[y]);
    for (std::size_t j = 0; j < c; ++j) {
      const T p = static_cast<T>(std::exp(static_cast<double>(lr[j]) - lse));
      res.probs(r, j) = p;
      res.dlogits(r, j) = (p - (static_cast<std::size_t>(y) == j ? T(1) : T(0))) / T(b);
    }
  }
  res.loss = total / static_cast<double>(b);
  return res;
}

}  // namespace nfuse::ops
