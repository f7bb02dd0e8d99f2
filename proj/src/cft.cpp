#include "qfiw/cft.hpp"
#include "qfiw/errors.hpp"
#include "qfiw/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qfiw {

namespace {

using cdouble = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Classic Lanczos g = 7 coefficient set.
constexpr double kLanczosG = 7.0;
constexpr double kLanczosP[9] = {
    0.99999999999980993,    676.5203681218851,     -1259.1392167224028,
    771.32342877765313,     -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7,
};

// log(sin(pi z)) without overflow for large |Im z|.
cdouble log_sin_pi(cdouble z) {
    const double im = z.imag();
    if (std::abs(im) < 1.0) return std::log(std::sin(kPi * z));
    const cdouble ipz = cdouble(0.0, 1.0) * kPi * z;
    if (im < 0.0) {
        // e^{i pi z} dominates: sin(pi z) = e^{i pi z}(1 - e^{-2 i pi z})/(2i)
        return ipz + std::log(1.0 - std::exp(-2.0 * ipz)) - std::log(cdouble(0.0, 2.0));
    }
    return -ipz + std::log(std::exp(2.0 * ipz) - 1.0) - std::log(cdouble(0.0, 2.0));
}

cdouble log_gamma_core(cdouble z) {
    // Requires Re z >= 0.5.
    z -= 1.0;
    cdouble x = kLanczosP[0];
    for (int i = 1; i < 9; ++i) x += kLanczosP[i] / (z + static_cast<double>(i));
    const cdouble t = z + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

} // namespace

std::complex<double> log_gamma(std::complex<double> z) {
    if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()))
        throw validation_error("log_gamma pole at nonpositive integer " +
                               std::to_string(z.real()));
    if (z.real() >= 0.5) return log_gamma_core(z);
    // Reflection: log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z).
    return std::log(kPi) - log_sin_pi(z) - log_gamma_core(1.0 - z);
}

void CftParams::validate() const {
    if (!(amplitude_d > 0.0)) throw validation_error("amplitude D must be > 0");
    if (!(t0 > 0.0)) throw validation_error("T0 must be > 0");
}

double delta_eff(double t, const CftParams& p) {
    p.validate();
    if (!(t > 0.0)) throw validation_error("temperature must be > 0");
    if (t >= p.t0)
        throw validation_error("T = " + std::to_string(t) + " is outside the domain T < T0 = " +
                               std::to_string(p.t0));
    const double logratio = std::log(p.t0 / t);
    return 0.25 * (1.0 - 0.5 / logratio);
}

bool in_validity_region(double t, const CftParams& p) {
    return t > 0.0 && t < p.t0 * std::exp(-0.5);
}

namespace {

void require_validity(double t, const CftParams& p, const char* what) {
    if (!in_validity_region(t, p))
        throw validation_error(std::string(what) + ": T = " + std::to_string(t) +
                               " is outside the validity region (0, T0 e^{-1/2} = " +
                               std::to_string(p.t0 * std::exp(-0.5)) + ")");
}

} // namespace

double chi_imag_cft(double omega, double t, const CftParams& p) {
    require_validity(t, p, "chi_imag_cft");
    if (omega == 0.0) return 0.0;
    const double sign = omega > 0.0 ? 1.0 : -1.0;
    const double w = std::abs(omega) / (4.0 * kPi * t);
    const double delta = delta_eff(t, p);
    const double logratio = std::log(p.t0 / t);

    const cdouble lg = 2.0 * log_gamma(cdouble(1.0 - 2.0 * delta, 0.0)) +
                       2.0 * (log_gamma(cdouble(delta, -w)) -
                              log_gamma(cdouble(1.0 - delta, -w)));
    const cdouble g = std::exp(lg);
    const double pref = std::pow(2.0, 2.0 * delta - 1.5) * p.amplitude_d / (kPi * t) *
                        std::sin(2.0 * kPi * delta) * std::sqrt(logratio);
    const double val = pref * g.imag();
    if (val < -1e-12 * pref * std::abs(g))
        throw numerical_error("chi'' sign anomaly at omega = " + std::to_string(omega) +
                              ", T = " + std::to_string(t) + ": value " + std::to_string(val));
    return sign * val;
}

double dsf_cft(double omega, double t, const CftParams& p) {
    require_validity(t, p, "dsf_cft");
    if (omega == 0.0) omega = 1e-6 * t;  // finite limit; linear/linear at small omega
    const double denom = kPi * (-std::expm1(-omega / t));
    return chi_imag_cft(omega, t, p) / denom;
}

double static_cft(double t, const CftParams& p) {
    require_validity(t, p, "static_cft");
    const double delta = delta_eff(t, p);
    if (delta >= 0.25 - 1e-15)
        throw validation_error("static_cft pole: Gamma(1 - 4 Delta) diverges at Delta = 1/4");
    const double logratio = std::log(p.t0 / t);
    const double lg = std::lgamma(1.0 - 4.0 * delta) + std::lgamma(1.0 - 2.0 * delta) -
                      std::lgamma(2.0 * delta);
    // The Gamma ratio is real and positive here; Re() in the source formula is
    // the identity.
    return std::pow(2.0, delta + 0.5) * p.amplitude_d * std::sqrt(logratio) * std::exp(lg);
}

double epsilon_cft(double t, const CftParams& p, const EpsilonCutoffs& cut) {
    require_validity(t, p, "epsilon_cft");
    if (!(cut.omega_min_rel > 0.0) || !(cut.omega_max_rel > cut.omega_min_rel))
        throw validation_error("epsilon cutoffs need 0 < omega_min < omega_max");
    const double lo = cut.omega_min_rel * t;
    const double hi = cut.omega_max_rel * t;
    const auto integrand = [&](double omega) {
        const double x = omega / t;
        if (x > 700.0) return 0.0;
        return 16.0 * dsf_cft(omega, t, p) / (1.0 + std::exp(x));
    };
    // Split at the thermal scale: the integrand turns over at omega ~ T.
    const QuadResult low = integrate_adaptive(integrand, lo, std::min(t, hi), 1e-8);
    QuadResult high;
    if (hi > t) high = integrate_adaptive(integrand, t, hi, 1e-8);
    return low.value + high.value;
}

QfiReport cft_report(double t, const CftParams& p, const EpsilonCutoffs& cut) {
    QfiReport rep;
    rep.s_q_times4 = 4.0 * static_cft(t, p);
    rep.epsilon = epsilon_cft(t, p, cut);
    rep.f_q = std::max(rep.s_q_times4 - rep.epsilon, 0.0);
    rep.beta = 1.0 / t;
    rep.route = QfiRoute::cft;
    rep.elastic_excluded = true;  // continuum theory: no Bragg line
    rep.n_sites = 0;
    rep.q = kPi;
    rep.depth_qfi = witnessed_depth(rep.f_q, 0, DepthMode::qfi).depth;
    rep.depth_static = witnessed_depth(rep.s_q_times4, 0, DepthMode::static_bound).depth;
    return rep;
}

} // namespace qfiw
