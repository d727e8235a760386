#include "nfuse/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "nfuse/kernels/avx2.hpp"
#include "nfuse/kernels/scalar.hpp"

namespace nfuse::kern {

bool cpu_has_avx2() {
#if defined(NEUROFUSE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend detect_backend() {
  if (const char* env = std::getenv("NEUROFUSE_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::avx2;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend> g_backend{detect_backend()};

}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::avx2 && !cpu_has_avx2()) b = Backend::scalar;
  g_backend.store(b, std::memory_order_relaxed);
}

const char* backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

#if defined(NEUROFUSE_HAVE_AVX2)
#define NFUSE_DISPATCH(fn, ...)                          \
  do {                                                   \
    if (active_backend() == Backend::avx2)               \
      return avx2::fn(__VA_ARGS__);                      \
    return scalar::fn(__VA_ARGS__);                      \
  } while (0)
#else
#define NFUSE_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c, bool acc) {
  NFUSE_DISPATCH(gemm_nn, m, n, k, a, b, c, acc);
}
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c, bool acc) {
  NFUSE_DISPATCH(gemm_nn, m, n, k, a, b, c, acc);
}
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c, bool acc) {
  NFUSE_DISPATCH(gemm_nt, m, n, k, a, b, c, acc);
}
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c, bool acc) {
  NFUSE_DISPATCH(gemm_nt, m, n, k, a, b, c, acc);
}
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c, bool acc) {
  NFUSE_DISPATCH(gemm_tn, m, n, k, a, b, c, acc);
}
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c, bool acc) {
  NFUSE_DISPATCH(gemm_tn, m, n, k, a, b, c, acc);
}

float dot(std::size_t n, const float* x, const float* y) { NFUSE_DISPATCH(dot, n, x, y); }
double dot(std::size_t n, const double* x, const double* y) { NFUSE_DISPATCH(dot, n, x, y); }

void axpy(std::size_t n, float alpha, const float* x, float* y) { NFUSE_DISPATCH(axpy, n, alpha, x, y); }
void axpy(std::size_t n, double alpha, const double* x, double* y) { NFUSE_DISPATCH(axpy, n, alpha, x, y); }

void scale(std::size_t n, float alpha, float* x) { NFUSE_DISPATCH(scale, n, alpha, x); }
void scale(std::size_t n, double alpha, double* x) { NFUSE_DISPATCH(scale, n, alpha, x); }

float sum(std::size_t n, const float* x) { NFUSE_DISPATCH(sum, n, x); }
double sum(std::size_t n, const double* x) { NFUSE_DISPATCH(sum, n, x); }

void relu_fwd(std::size_t n, const float* x, float* y) { NFUSE_DISPATCH(relu_fwd, n, x, y); }
void relu_fwd(std::size_t n, const double* x, double* y) { return scalar::relu_fwd(n, x, y); }
void relu_bwd(std::size_t n, const float* x, const float* dy, float* dx) { NFUSE_DISPATCH(relu_bwd, n, x, dy, dx); }
void relu_bwd(std::size_t n, const double* x, const double* dy, double* dx) { return scalar::relu_bwd(n, x, dy, dx); }

void leaky_relu_fwd(std::size_t n, float slope, const float* x, float* y) { NFUSE_DISPATCH(leaky_relu_fwd, n, slope, x, y); }
void leaky_relu_fwd(std::size_t n, double slope, const double* x, double* y) { return scalar::leaky_relu_fwd(n, slope, x, y); }
void leaky_relu_bwd(std::size_t n, float slope, const float* x, const float* dy, float* dx) { NFUSE_DISPATCH(leaky_relu_bwd, n, slope, x, dy, dx); }
void leaky_relu_bwd(std::size_t n, double slope, const double* x, const double* dy, double* dx) { return scalar::leaky_relu_bwd(n, slope, x, dy, dx); }

}  // namespace nfuse::kern
