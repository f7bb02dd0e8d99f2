#pragma once

#include "qfiw/op.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qfiw {

// Lehmann lines closer than this are merged (float-degenerate levels), and
// |omega| below it is tagged elastic.
inline constexpr double kOmegaMerge = 1e-9;
inline constexpr double kElasticTol = 1e-9;

struct Pole {
    double omega = 0.0;
    double weight = 0.0;
};

// Exact dynamic structure factor at fixed (q, beta): a list of weighted lines.
// Poles are sorted by omega; the negative side mirrors the positive one with
// weights e^{-beta omega} * w (detailed balance holds by construction because
// p_j = p_i e^{-beta(E_j - E_i)} exactly). Elastic weight (|omega| < tol,
// diagonal and degenerate pairs) is kept but flagged via elastic_weight().
struct LineSpectrum {
    double q = 0.0;
    double beta = 1.0;
    int n_sites = 0;
    bool includes_elastic = true;
    std::vector<Pole> poles;

    double total_weight() const;
    double elastic_weight() const;
    // Poles with omega > kElasticTol, ascending.
    std::span<const Pole> positive_poles() const;
};

LineSpectrum lehmann_dsf(const EigenSystem& es, const ThermalEnsemble& ens,
                         const std::vector<SectorOperator>& ops, const OperatorSpec& op);

// S(q) as the total line weight (sum rule).
double static_structure(const LineSpectrum& ls);

// Independent route: S(q) = (1/N) sum_xy e^{-iq(x-y)} <Sz_x Sz_y> evaluated
// from the thermal density diagonal in the computational basis. Agrees with
// static_structure(lehmann_dsf(...)) to 1e-10; used as the cross-check.
double static_structure_direct(const EigenSystem& es, const ThermalEnsemble& ens,
                               const OperatorSpec& op);

// chi''(q,omega) = pi (1 - e^{-beta omega}) S(q,omega) applied per pole;
// antisymmetric in omega, weights for omega < 0 are negative.
std::vector<Pole> chi_imag_from_dsf(const LineSpectrum& ls);

struct GridSpec {
    double omega_min = -5.0;
    double omega_max = 5.0;
    double step = 0.005;

    std::size_t points() const;
    // Extends the range so every pole keeps 9 sigma of Gaussian mass.
    static GridSpec covering(const LineSpectrum& ls, double sigma, double step = 0.005);
};

// Binned/broadened S(q,omega) on a uniform grid; also the ingestion format.
// Values are densities per unit omega ("absolute"); per_2pi marks external
// data normalized in units of 2*pi.
struct SpectralGrid {
    enum class Norm { absolute, per_2pi };
    enum class Quantity { dsf, chi_imag };

    double q = 0.0;
    double beta = 1.0;
    double omega_min = 0.0;
    double step = 0.0;
    std::vector<double> values;
    double broadening_eta = 0.0;
    Norm normalization = Norm::absolute;
    Quantity quantity = Quantity::dsf;
    double declared_total = 0.0;

    std::size_t size() const { return values.size(); }
    double omega(std::size_t i) const { return omega_min + static_cast<double>(i) * step; }
    double omega_max() const { return values.empty() ? omega_min : omega(values.size() - 1); }
    double trapezoid_total() const;
};

SpectralGrid chi_imag_from_dsf(const SpectralGrid& grid);

// Gaussian broadening with the frequency-domain dual of the e^{-eta t^2} time
// damping: sigma = sqrt(2 eta). Total mass is conserved to 1e-6 relative; a
// grid that cannot hold 8 sigma around every pole is rejected with the lost
// mass listed.
SpectralGrid broaden(const LineSpectrum& ls, double eta, const GridSpec& grid);

// Total-moment sum rule over the full momentum set:
// (1/N) sum_q integral S(q,omega) domega = S(S+1)/3 = 1/4.
struct SumRuleReport {
    double moment = 0.0;
    double deviation = 0.0;
    int n_q = 0;
};

SumRuleReport sum_rule_check(std::span<const LineSpectrum> spectra);
SumRuleReport sum_rule_check(std::span<const SpectralGrid> grids, int n_sites);

} // namespace qfiw
