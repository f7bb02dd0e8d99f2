// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma; entered only after a
// runtime cpuid check in kernels.cpp.
#include "qfiw/kernels.hpp"

#if defined(QFIW_HAVE_AVX2)

#include <immintrin.h>
#include <cmath>

namespace qfiw::kern {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double dot3_avx2(const double* a, const double* b, const double* c, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(ab, _mm256_loadu_pd(c + i), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i] * c[i];
    return s;
}

double reduce_add_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double alpha, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

// Gaussian values on a uniform grid obey a two-term multiplicative recurrence:
// with g_i = p(x_i) and r_i = p(x_{i+4})/p(x_i), stepping 4 lanes at a time
// gives g <- g*r, r <- r*rho where rho = exp(-16 dx^2 / sigma^2) is constant.
// The recurrence drifts by O(n_steps * eps) relative, far below the broadening
// tolerances; narrow kernels (dx > sigma) fall back to direct exp.
void gaussian_accumulate_avx2(double* out, std::size_t n, double x0, double dx,
                              double mu, double sigma, double w) {
    const double amp = w * kInvSqrt2Pi / sigma;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    // Restrict to |x - mu| <= 9 sigma: outside, values are < 1e-17 of the
    // peak, and a recurrence started deep in the tail would begin from an
    // underflowed zero it could never recover from.
    {
        const double lo = mu - 9.0 * sigma, hi = mu + 9.0 * sigma;
        if (x0 < lo) {
            const auto skip = static_cast<std::size_t>((lo - x0) / dx);
            if (skip >= n) return;
            x0 += static_cast<double>(skip) * dx;
            out += skip;
            n -= skip;
        }
        if (x0 > hi) return;
        const auto keep = static_cast<std::size_t>((hi - x0) / dx) + 1;
        n = std::min(n, keep);
    }
    if (n < 16 || dx > sigma) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x0 + static_cast<double>(i) * dx - mu;
            out[i] += amp * std::exp(-d * d * inv2s2);
        }
        return;
    }
    alignas(32) double g0[4], r0[4];
    const double step = 4.0 * dx;
    for (int l = 0; l < 4; ++l) {
        const double d = x0 + l * dx - mu;
        g0[l] = amp * std::exp(-d * d * inv2s2);
        r0[l] = std::exp(-(2.0 * d * step + step * step) * inv2s2);
    }
    __m256d g = _mm256_load_pd(g0);
    __m256d r = _mm256_load_pd(r0);
    const __m256d rho = _mm256_set1_pd(std::exp(-2.0 * step * step * inv2s2));
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), g));
        g = _mm256_mul_pd(g, r);
        r = _mm256_mul_pd(r, rho);
    }
    for (; i < n; ++i) {
        const double d = x0 + static_cast<double>(i) * dx - mu;
        out[i] += amp * std::exp(-d * d * inv2s2);
    }
}

// Phase rotation recurrence: keep cos/sin of four consecutive phases and
// advance all four by the lane stride each step.
double cos_sin_reduce_avx2(const double* re, const double* im, std::size_t n,
                           double omega, double dt) {
    if (n < 16) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) * dt;
            acc += std::cos(omega * t) * re[i] - std::sin(omega * t) * im[i];
        }
        return acc;
    }
    alignas(32) double c0[4], s0[4];
    for (int l = 0; l < 4; ++l) {
        c0[l] = std::cos(omega * l * dt);
        s0[l] = std::sin(omega * l * dt);
    }
    __m256d c = _mm256_load_pd(c0);
    __m256d s = _mm256_load_pd(s0);
    const double phi = 4.0 * omega * dt;
    const __m256d cphi = _mm256_set1_pd(std::cos(phi));
    const __m256d sphi = _mm256_set1_pd(std::sin(phi));
    __m256d acc_c = _mm256_setzero_pd();
    __m256d acc_s = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc_c = _mm256_fmadd_pd(c, _mm256_loadu_pd(re + i), acc_c);
        acc_s = _mm256_fmadd_pd(s, _mm256_loadu_pd(im + i), acc_s);
        const __m256d cn = _mm256_fmsub_pd(c, cphi, _mm256_mul_pd(s, sphi));
        const __m256d sn = _mm256_fmadd_pd(s, cphi, _mm256_mul_pd(c, sphi));
        c = cn;
        s = sn;
    }
    double acc = hsum(acc_c) - hsum(acc_s);
    for (; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        acc += std::cos(omega * t) * re[i] - std::sin(omega * t) * im[i];
    }
    return acc;
}

const Ops kAvx2 = {
    dot_avx2, dot3_avx2, reduce_add_avx2, axpy_avx2, scale_avx2,
    gaussian_accumulate_avx2, cos_sin_reduce_avx2, "avx2",
};

} // namespace

const Ops* avx2_ops_impl() { return &kAvx2; }

} // namespace qfiw::kern

#endif // QFIW_HAVE_AVX2
