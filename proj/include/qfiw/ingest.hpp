#pragma once

#include "qfiw/spectrum.hpp"

#include <string>
#include <vector>

namespace qfiw {

// Space-time correlation table G(x,t) = <Sz_x(t) Sz_c(0)> on a complete
// rectangular (x, t) grid with uniform time step.
struct CorrelationTable {
    int n_sites = 0;
    int center = 0;
    double dt = 0.0;
    double t_max = 0.0;
    double beta = 0.0;
    Eigen::MatrixXd re;  // n_sites x n_times
    Eigen::MatrixXd im;

    std::size_t n_times() const { return static_cast<std::size_t>(re.cols()); }
    double time(std::size_t k) const { return static_cast<double>(k) * dt; }
    void validate() const;
};

// Correlation CSV: "# n_sites=<int> center=<int> dt=<float> tmax=<float>
// beta=<float>" then x,t,re,im rows. Floats use 17 significant digits so a
// save/load round-trip is exact.
CorrelationTable load_correlations(const std::string& path);
void save_correlations(const CorrelationTable& tab, const std::string& path);

// Spectral CSV: "# q=<float> beta=<float> eta=<float> norm=<absolute|per_2pi>"
// then omega,value rows.
SpectralGrid load_spectral_csv(const std::string& path);
void save_spectral_csv(const SpectralGrid& grid, const std::string& path);

// per_2pi data carries an extra factor 2*pi relative to absolute units.
SpectralGrid to_absolute(const SpectralGrid& grid);

// Positive-time transform S(q,omega) = (1/pi) int_0^tmax dt sum_x cos(q(x-c))
// [cos(wt) Re G - sin(wt) Im G] e^{-eta t^2}, trapezoid in t. The output is
// strictly real by construction; any negative bins are reported, eta is
// escalated x2 (up to 4 times) while the negative mass exceeds 1e-6 of the
// total, and whatever remains is clipped.
struct TransformResult {
    SpectralGrid grid;
    double achieved_eta = 0.0;
    int escalations = 0;
    double max_negativity = 0.0;  // most negative bin value before clipping
    double clipped_mass = 0.0;    // integral of the clipped negative part
};

TransformResult transform_to_dsf(const CorrelationTable& tab, double q, double eta,
                                 const GridSpec& grid = {});

// Rescales a full-momentum set of grids so the total inelastic moment equals
// 1/4; a single global scalar, spectral shape unchanged.
struct NormalizeResult {
    double scale = 1.0;
    double moment_before = 0.0;
    double moment_after = 0.0;
};

NormalizeResult normalize_moment(std::vector<SpectralGrid>& grids, int n_sites);

// Zeroes |omega| < window (half-width; window = 0 is the identity) and
// reports the removed mass.
struct RemoveElasticResult {
    SpectralGrid grid;
    double removed_mass = 0.0;
};

RemoveElasticResult remove_elastic(const SpectralGrid& grid, double window);

} // namespace qfiw
