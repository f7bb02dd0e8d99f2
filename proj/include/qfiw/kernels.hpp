#pragma once

#include <cstddef>

namespace qfiw::kern {

// Data-parallel inner loops used by the spectral pipelines. Every entry has a
// scalar reference implementation and (on x86-64 with AVX2+FMA) a vectorized
// variant selected at runtime. The two are equivalence-tested against each
// other; accumulation order may differ, so agreement is to rounding, not bits.
struct Ops {
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i a[i] * b[i] * c[i]
    double (*dot3)(const double* a, const double* b, const double* c, std::size_t n);
    // sum_i a[i]
    double (*reduce_add)(const double* a, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // x[i] *= alpha
    void (*scale)(double alpha, double* x, std::size_t n);
    // out[i] += w * exp(-((x0 + i*dx - mu)^2)/(2 sigma^2)) / (sigma sqrt(2 pi))
    void (*gaussian_accumulate)(double* out, std::size_t n, double x0, double dx,
                                double mu, double sigma, double w);
    // sum_k cos(omega*k*dt)*re[k] - sin(omega*k*dt)*im[k]
    double (*cos_sin_reduce)(const double* re, const double* im, std::size_t n,
                             double omega, double dt);
    const char* name;
};

const Ops& scalar_ops();

// Null when the build or the CPU lacks AVX2+FMA.
const Ops* avx2_ops();

// Runtime selection: QFIW_KERNELS=scalar|avx2 forces a backend, otherwise the
// widest supported one wins.
const Ops& active();

// h * (sum y - (y[0]+y[n-1])/2) on a uniform grid; n >= 2.
double trapezoid(const double* y, std::size_t n, double h);

} // namespace qfiw::kern
