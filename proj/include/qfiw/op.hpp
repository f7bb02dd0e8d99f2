#pragma once

#include "qfiw/eigen_system.hpp"

#include <complex>
#include <vector>

namespace qfiw {

// Total S^z component at wavenumber q: O = sum_x e^{iqx} Sz_x. q must be
// commensurate, q = 2*pi*q_index/n_sites; the operator is diagonal in the
// computational basis and conserves total Sz.
struct OperatorSpec {
    int n_sites = 2;
    int q_index = 1;

    double q() const;
    // e^{iqx} per site; exact +-1 at q = pi.
    std::vector<std::complex<double>> phases() const;
    bool is_real() const { return 2 * q_index == n_sites || q_index == 0; }

    void validate(const ChainSpec& spec) const;

    static OperatorSpec at_pi(int n_sites);
    // Rejects wavenumbers that are not integer multiples of 2*pi/n_sites.
    static OperatorSpec from_wavenumber(int n_sites, double q);
};

// Eigenbasis matrix elements <psi_i|O|psi_j> within one Sz sector (the
// operator has no cross-sector elements). M = re + i*im is complex symmetric,
// so |M_ij| = |M_ji|.
struct SectorOperator {
    int two_sz = 0;
    Eigen::MatrixXd re;
    Eigen::MatrixXd im;   // empty when the phases are real
    bool has_imag = false;

    double abs2(Eigen::Index i, Eigen::Index j) const {
        const double r = re(i, j);
        const double m = has_imag ? im(i, j) : 0.0;
        return r * r + m * m;
    }
};

std::vector<SectorOperator> operator_matrix(const EigenSystem& es, const OperatorSpec& op);

// Thermal expectation <O> (real part; the staggered operator averages to zero
// on the isotropic chain at any beta).
double thermal_expectation(const EigenSystem& es, const ThermalEnsemble& ens,
                           const std::vector<SectorOperator>& ops);

} // namespace qfiw
