#pragma once

#include <cstddef>

// AVX2/FMA kernel variants. Declarations only; the definitions live in a
// translation unit compiled with -mavx2 -mfma and are reached exclusively
// through runtime dispatch, so the rest of the library builds without those
// flags. Absent entirely on non-x86 targets.

#if defined(NEUROFUSE_HAVE_AVX2)

namespace nfuse::kern::avx2 {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c, bool accumulate);
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c, bool accumulate);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c, bool accumulate);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c, bool accumulate);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c, bool accumulate);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c, bool accumulate);

float dot(std::size_t n, const float* x, const float* y);
double dot(std::size_t n, const double* x, const double* y);
void axpy(std::size_t n, float alpha, const float* x, float* y);
void axpy(std::size_t n, double alpha, const double* x, double* y);
void scale(std::size_t n, float alpha, float* x);
void scale(std::size_t n, double alpha, double* x);
float sum(std::size_t n, const float* x);
double sum(std::size_t n, const double* x);

void relu_fwd(std::size_t n, const float* x, float* y);
void relu_bwd(std::size_t n, const float* x, const float* dy, float* dx);
void leaky_relu_fwd(std::size_t n, float slope, const float* x, float* y);
void leaky_relu_bwd(std::size_t n, float slope, const float* x, const float* dy, float* dx);

}  // namespace nfuse::kern::avx2

#endif  // NEUROFUSE_HAVE_AVX2
