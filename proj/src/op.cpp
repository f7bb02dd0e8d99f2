#include "qfiw/op.hpp"
#include "qfiw/errors.hpp"
#include "qfiw/threads.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qfiw {

double OperatorSpec::q() const {
    return 2.0 * std::numbers::pi * q_index / n_sites;
}

std::vector<std::complex<double>> OperatorSpec::phases() const {
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n_sites));
    if (2 * q_index == n_sites) {
        for (int x = 0; x < n_sites; ++x) out[x] = (x % 2 == 0) ? 1.0 : -1.0;
    } else if (q_index == 0) {
        for (int x = 0; x < n_sites; ++x) out[x] = 1.0;
    } else {
        const double qv = q();
        for (int x = 0; x < n_sites; ++x)
            out[x] = std::complex<double>(std::cos(qv * x), std::sin(qv * x));
    }
    return out;
}

void OperatorSpec::validate(const ChainSpec& spec) const {
    if (n_sites != spec.n_sites)
        throw validation_error("operator n_sites does not match chain spec");
    if (q_index < 0 || q_index >= n_sites)
        throw validation_error("q_index out of range [0, n_sites)");
}

OperatorSpec OperatorSpec::at_pi(int n_sites) {
    if (n_sites % 2 != 0)
        throw validation_error("q = pi is incommensurate with odd n_sites");
    return OperatorSpec{n_sites, n_sites / 2};
}

OperatorSpec OperatorSpec::from_wavenumber(int n_sites, double q) {
    const double m = q * n_sites / (2.0 * std::numbers::pi);
    const double mr = std::round(m);
    if (std::abs(m - mr) > 1e-9)
        throw validation_error("wavenumber q = " + std::to_string(q) +
                               " is not commensurate with n_sites = " + std::to_string(n_sites));
    int mi = static_cast<int>(mr);
    mi %= n_sites;
    if (mi < 0) mi += n_sites;
    return OperatorSpec{n_sites, mi};
}

std::vector<SectorOperator> operator_matrix(const EigenSystem& es, const OperatorSpec& op) {
    op.validate(es.spec);
    const auto phase = op.phases();
    const bool real_only = op.is_real();

    std::vector<SectorOperator> out(es.sectors.size());
    parallel_for_index(es.sectors.size(), [&](std::size_t b) {
        const auto& sec = es.sectors[b];
        const Eigen::Index d = static_cast<Eigen::Index>(sec.states.size());
        Eigen::VectorXd dre(d), dim(d);
        for (Eigen::Index k = 0; k < d; ++k) {
            const std::uint32_t s = sec.states[static_cast<std::size_t>(k)];
            double re = 0.0, im = 0.0;
            for (int x = 0; x < op.n_sites; ++x) {
                const double sz = spin_z(s, x);
                re += phase[x].real() * sz;
                im += phase[x].imag() * sz;
            }
            dre(k) = re;
            dim(k) = im;
        }
        SectorOperator so;
        so.two_sz = sec.two_sz;
        so.re.noalias() = sec.vectors.transpose() * dre.asDiagonal() * sec.vectors;
        so.has_imag = !real_only;
        if (so.has_imag)
            so.im.noalias() = sec.vectors.transpose() * dim.asDiagonal() * sec.vectors;
        out[b] = std::move(so);
    });
    return out;
}

double thermal_expectation(const EigenSystem& es, const ThermalEnsemble& ens,
                           const std::vector<SectorOperator>& ops) {
    double acc = 0.0;
    for (std::size_t b = 0; b < es.sectors.size(); ++b) {
        const Eigen::Index d = es.sectors[b].energies.size();
        for (Eigen::Index i = 0; i < d; ++i) acc += ens.weights[b](i) * ops[b].re(i, i);
    }
    return acc;
}

} // namespace qfiw
