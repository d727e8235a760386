#pragma once

#include <cstddef>

// Dense arithmetic kernels used by the tensor layer. Every kernel has a
// scalar reference implementation; on x86-64 an AVX2/FMA variant is selected
// at runtime. The two are equivalence-tested against each other (exact for
// elementwise kernels, tight relative tolerance for reductions, whose
// accumulation order differs between backends).
//
// All matrices are row-major and contiguous.

namespace nfuse::kern {

enum class Backend { scalar, avx2 };

// Active backend, chosen once per process: AVX2 if the CPU supports it,
// unless overridden by set_backend() or the NEUROFUSE_KERNELS=scalar env var.
Backend active_backend();
void set_backend(Backend b);
const char* backend_name(Backend b);
bool cpu_has_avx2();

// C(m x n) (+)= A(m x k) * B(k x n)
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c, bool accumulate);
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c, bool accumulate);

// C(m x n) (+)= A(m x k) * B(n x k)^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c, bool accumulate);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c, bool accumulate);

// C(m x n) (+)= A(k x m)^T * B(k x n)
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c, bool accumulate);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c, bool accumulate);

float dot(std::size_t n, const float* x, const float* y);
double dot(std::size_t n, const double* x, const double* y);

// y += alpha * x
void axpy(std::size_t n, float alpha, const float* x, float* y);
void axpy(std::size_t n, double alpha, const double* x, double* y);

// x *= alpha
void scale(std::size_t n, float alpha, float* x);
void scale(std::size_t n, double alpha, double* x);

float sum(std::size_t n, const float* x);
double sum(std::size_t n, const double* x);

void relu_fwd(std::size_t n, const float* x, float* y);
void relu_fwd(std::size_t n, const double* x, double* y);
// dx = dy where x > 0, else 0
void relu_bwd(std::size_t n, const float* x, const float* dy, float* dx);
void relu_bwd(std::size_t n, const double* x, const double* dy, double* dx);

void leaky_relu_fwd(std::size_t n, float slope, const float* x, float* y);
void leaky_relu_fwd(std::size_t n, double slope, const double* x, double* y);
void leaky_relu_bwd(std::size_t n, float slope, const float* x, const float* dy, float* dx);
void leaky_relu_bwd(std::size_t n, double slope, const double* x, const double* dy, double* dx);

}  // namespace nfuse::kern
