#include "qfiw/kernels.hpp"
#include "qfiw/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

namespace qfiw::kern {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double dot3_scalar(const double* a, const double* b, const double* c, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i] * c[i];
    return acc;
}

double reduce_add_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void gaussian_accumulate_scalar(double* out, std::size_t n, double x0, double dx,
                                double mu, double sigma, double w) {
    const double amp = w * kInvSqrt2Pi / sigma;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x0 + static_cast<double>(i) * dx - mu;
        out[i] += amp * std::exp(-d * d * inv2s2);
    }
}

double cos_sin_reduce_scalar(const double* re, const double* im, std::size_t n,
                             double omega, double dt) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        acc += std::cos(omega * t) * re[i] - std::sin(omega * t) * im[i];
    }
    return acc;
}

const Ops kScalar = {
    dot_scalar, dot3_scalar, reduce_add_scalar, axpy_scalar, scale_scalar,
    gaussian_accumulate_scalar, cos_sin_reduce_scalar, "scalar",
};

} // namespace

const Ops& scalar_ops() { return kScalar; }

#if defined(QFIW_HAVE_AVX2)
const Ops* avx2_ops_impl(); // defined in kernels_avx2.cpp

const Ops* avx2_ops() {
    static const Ops* ops = [] {
        const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
        return ok ? avx2_ops_impl() : nullptr;
    }();
    return ops;
}
#else
const Ops* avx2_ops() { return nullptr; }
#endif

const Ops& active() {
    static const Ops* chosen = [sel = std::getenv("QFIW_KERNELS")]() -> const Ops* {
        if (sel != nullptr) {
            const std::string s(sel);
            if (s == "scalar") return &kScalar;
            if (s == "avx2") {
                const Ops* ops = avx2_ops();
                if (ops == nullptr)
                    throw validation_error("QFIW_KERNELS=avx2 but AVX2+FMA is unavailable");
                return ops;
            }
            throw validation_error("QFIW_KERNELS must be 'scalar' or 'avx2', got '" + s + "'");
        }
        const Ops* ops = avx2_ops();
        return ops != nullptr ? ops : &kScalar;
    }();
    return *chosen;
}

double trapezoid(const double* y, std::size_t n, double h) {
    if (n < 2) return 0.0;
    const double total = active().reduce_add(y, n);
    return h * (total - 0.5 * (y[0] + y[n - 1]));
}

} // namespace qfiw::kern
