#pragma once

#include "qfiw/qfi.hpp"

#include <complex>

namespace qfiw {

// Non-universal constants of the low-energy staggered response of the
// isotropic chain, in units of J.
struct CftParams {
    double amplitude_d = 0.075;
    double t0 = 4.5;

    void validate() const;
};

// Principal-branch complex log-Gamma (Lanczos, reflection for Re z < 0.5).
// exp(log_gamma(z)) matches Gamma(z) to better than 1e-12 relative on the
// real range [0.1, 30] and on the operating strip.
std::complex<double> log_gamma(std::complex<double> z);

// Effective scaling dimension Delta(T) = (1/4)(1 - 1/(2 log(T0/T))).
// Positive (the validity region) for T < T0 e^{-1/2}; domain error at T >= T0.
double delta_eff(double t, const CftParams& p);
bool in_validity_region(double t, const CftParams& p);

// Staggered dynamical susceptibility of the chain at finite T. The printed
// prefactor log(T/T0)^{1/2} is the square root of a negative number for
// T < T0; this implementation evaluates |log(T0/T)|^{1/2} and treats a
// negative chi''(omega > 0) as a hard sign-anomaly error rather than flipping
// it. Odd in omega, exact zero at omega = 0.
double chi_imag_cft(double omega, double t, const CftParams& p);

// S(omega) = chi''/(pi (1 - e^{-beta omega})); detailed balance holds by
// construction and the omega -> 0 limit is finite.
double dsf_cft(double omega, double t, const CftParams& p);

// Closed-form S(pi, T); diverges like (log(T0/T))^{3/2} as T -> 0 through the
// Gamma(1 - 4 Delta) pole factor.
double static_cft(double t, const CftParams& p);

// Frequency cutoffs for the epsilon integral, relative to T. The integrand
// decays as e^{-omega/T}, so 50 T suffices; the omega -> 0 mass below
// 1e-8 T is below 1e-8 relative (the integrand limit is finite).
struct EpsilonCutoffs {
    double omega_min_rel = 1e-8;
    double omega_max_rel = 50.0;
};

// eps(T) = 16 int S(omega)/(1 + e^{omega/T}) domega by adaptive quadrature to
// 1e-8 relative.
double epsilon_cft(double t, const CftParams& p, const EpsilonCutoffs& cut = {});

// route = cft report: f_q = 4 static_cft - epsilon_cft (clamped at 0).
QfiReport cft_report(double t, const CftParams& p, const EpsilonCutoffs& cut = {});

} // namespace qfiw
