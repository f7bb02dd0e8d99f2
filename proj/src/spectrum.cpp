#include "qfiw/spectrum.hpp"
#include "qfiw/errors.hpp"
#include "qfiw/kernels.hpp"
#include "qfiw/threads.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qfiw {

namespace {

// |<i|O|j>|^2 below this is eigensolver noise, not a matrix element.
constexpr double kAbs2Floor = 1e-26;

double stable_exp_neg(double x) {  // e^{-x} for x >= 0 without overflow traps
    return x > 745.0 ? 0.0 : std::exp(-x);
}

} // namespace

double LineSpectrum::total_weight() const {
    double s = 0.0;
    for (const auto& p : poles) s += p.weight;
    return s;
}

double LineSpectrum::elastic_weight() const {
    double s = 0.0;
    for (const auto& p : poles)
        if (std::abs(p.omega) < kElasticTol) s += p.weight;
    return s;
}

std::span<const Pole> LineSpectrum::positive_poles() const {
    const auto it = std::upper_bound(poles.begin(), poles.end(), kElasticTol,
                                     [](double v, const Pole& p) { return v < p.omega; });
    const auto offset = static_cast<std::size_t>(it - poles.begin());
    return {poles.data() + offset, poles.size() - offset};
}

LineSpectrum lehmann_dsf(const EigenSystem& es, const ThermalEnsemble& ens,
                         const std::vector<SectorOperator>& ops, const OperatorSpec& op) {
    op.validate(es.spec);
    const double n = static_cast<double>(es.spec.n_sites);

    std::vector<Pole> raw;
    double elastic = 0.0;
    for (std::size_t b = 0; b < es.sectors.size(); ++b) {
        const auto& sec = es.sectors[b];
        const auto& w = ens.weights[b];
        const auto& M = ops[b];
        const Eigen::Index d = sec.energies.size();
        for (Eigen::Index i = 0; i < d; ++i) {
            const double dii = M.abs2(i, i);
            if (dii > kAbs2Floor) elastic += w(i) * dii / n;
            for (Eigen::Index j = i + 1; j < d; ++j) {
                const double a2 = M.abs2(i, j);
                if (a2 <= kAbs2Floor) continue;
                const double omega = sec.energies(j) - sec.energies(i);
                if (omega <= kOmegaMerge) {
                    elastic += (w(i) + w(j)) * a2 / n;
                } else if (w(i) > 0.0) {
                    // w(i) >= w(j) within a sector, so nothing survives below
                    // this line either
                    raw.push_back({omega, w(i) * a2 / n});
                }
            }
        }
    }

    std::sort(raw.begin(), raw.end(),
              [](const Pole& a, const Pole& b) { return a.omega < b.omega; });

    // Merge float-degenerate lines; the merged position is the weight mean.
    std::vector<Pole> positive;
    positive.reserve(raw.size());
    for (const auto& p : raw) {
        if (!positive.empty() && p.omega - positive.back().omega <= kOmegaMerge) {
            Pole& last = positive.back();
            const double wsum = last.weight + p.weight;
            last.omega = (last.omega * last.weight + p.omega * p.weight) / wsum;
            last.weight = wsum;
        } else {
            positive.push_back(p);
        }
    }

    LineSpectrum ls;
    ls.q = op.q();
    ls.beta = ens.beta;
    ls.n_sites = es.spec.n_sites;
    ls.includes_elastic = true;
    ls.poles.reserve(2 * positive.size() + 1);
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
        const double wneg = it->weight * stable_exp_neg(ens.beta * it->omega);
        if (wneg > 0.0) ls.poles.push_back({-it->omega, wneg});
    }
    if (elastic > 0.0) ls.poles.push_back({0.0, elastic});
    ls.poles.insert(ls.poles.end(), positive.begin(), positive.end());
    return ls;
}

double static_structure(const LineSpectrum& ls) { return ls.total_weight(); }

double static_structure_direct(const EigenSystem& es, const ThermalEnsemble& ens,
                               const OperatorSpec& op) {
    op.validate(es.spec);
    const int n = es.spec.n_sites;
    const std::size_t dim = std::size_t{1} << n;

    // Thermal density-matrix diagonal in the computational basis.
    std::vector<double> rho(dim, 0.0);
    for (std::size_t b = 0; b < es.sectors.size(); ++b) {
        const auto& sec = es.sectors[b];
        const Eigen::Index d = sec.energies.size();
        const Eigen::VectorXd occ = sec.vectors.cwiseAbs2() * ens.weights[b];
        for (Eigen::Index k = 0; k < d; ++k)
            rho[sec.states[static_cast<std::size_t>(k)]] = occ(k);
    }

    std::vector<std::vector<double>> sz(static_cast<std::size_t>(n),
                                        std::vector<double>(dim));
    for (int x = 0; x < n; ++x)
        for (std::size_t s = 0; s < dim; ++s)
            sz[static_cast<std::size_t>(x)][s] = spin_z(static_cast<std::uint32_t>(s), x);

    const auto& k = kern::active();
    const double qv = op.q();
    double total = 0.0;
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            const double cxy = k.dot3(rho.data(), sz[static_cast<std::size_t>(x)].data(),
                                      sz[static_cast<std::size_t>(y)].data(), dim);
            total += std::cos(qv * (x - y)) * cxy;
        }
    }
    return total / n;
}

std::vector<Pole> chi_imag_from_dsf(const LineSpectrum& ls) {
    std::vector<Pole> out;
    out.reserve(ls.poles.size());
    for (const auto& p : ls.poles) {
        const double factor = std::numbers::pi * (-std::expm1(-ls.beta * p.omega));
        out.push_back({p.omega, factor * p.weight});
    }
    return out;
}

SpectralGrid chi_imag_from_dsf(const SpectralGrid& grid) {
    SpectralGrid out = grid;
    out.quantity = SpectralGrid::Quantity::chi_imag;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] *= std::numbers::pi * (-std::expm1(-grid.beta * grid.omega(i)));
    out.declared_total = 0.0;
    return out;
}

std::size_t GridSpec::points() const {
    if (!(step > 0.0) || omega_max <= omega_min)
        throw validation_error("grid requires step > 0 and omega_max > omega_min");
    return static_cast<std::size_t>(std::floor((omega_max - omega_min) / step + 0.5)) + 1;
}

GridSpec GridSpec::covering(const LineSpectrum& ls, double sigma, double step) {
    double lo = 0.0, hi = 0.0;
    for (const auto& p : ls.poles) {
        lo = std::min(lo, p.omega);
        hi = std::max(hi, p.omega);
    }
    const double pad = 9.0 * sigma;
    GridSpec g;
    g.step = step;
    g.omega_min = std::floor((lo - pad) / step) * step;
    g.omega_max = std::ceil((hi + pad) / step) * step;
    return g;
}

double SpectralGrid::trapezoid_total() const {
    return kern::trapezoid(values.data(), values.size(), step);
}

SpectralGrid broaden(const LineSpectrum& ls, double eta, const GridSpec& grid) {
    if (!(eta > 0.0)) throw validation_error("broadening eta must be > 0");
    const double sigma = std::sqrt(2.0 * eta);
    const std::size_t npts = grid.points();

    // Coverage: every pole needs 8 sigma on both sides or its Gaussian mass
    // leaks off the grid.
    std::ostringstream lost;
    int n_lost = 0;
    double lost_mass = 0.0;
    for (const auto& p : ls.poles) {
        const double lo_gap = (p.omega - grid.omega_min) / sigma;
        const double hi_gap = (grid.omega_max - p.omega) / sigma;
        if (lo_gap < 8.0 || hi_gap < 8.0) {
            const double frac = 0.5 * (std::erfc(lo_gap / std::numbers::sqrt2) +
                                       std::erfc(hi_gap / std::numbers::sqrt2));
            lost_mass += frac * p.weight;
            if (++n_lost <= 8)
                lost << (n_lost > 1 ? ", " : "") << "omega=" << p.omega
                     << " (mass " << frac * p.weight << ")";
        }
    }
    if (n_lost > 0)
        throw validation_error("grid too narrow for broadening: " +
                               std::to_string(n_lost) + " poles lose total mass " +
                               std::to_string(lost_mass) + " [" + lost.str() + "]");

    SpectralGrid out;
    out.q = ls.q;
    out.beta = ls.beta;
    out.omega_min = grid.omega_min;
    out.step = grid.step;
    out.broadening_eta = eta;
    out.declared_total = ls.total_weight();
    out.values.assign(npts, 0.0);

    // Chunk count depends only on the input so the merged sum (and thus the
    // output bytes) is identical for any thread budget.
    const std::size_t chunks = std::clamp<std::size_t>(ls.poles.size() / 512, 1, 16);
    std::vector<std::vector<double>> partial(chunks);
    parallel_for_index(chunks, [&](std::size_t c) {
        auto& buf = partial[c];
        buf.assign(npts, 0.0);
        const auto& k = kern::active();
        const std::size_t b0 = ls.poles.size() * c / chunks;
        const std::size_t b1 = ls.poles.size() * (c + 1) / chunks;
        for (std::size_t pi = b0; pi < b1; ++pi) {
            const Pole& p = ls.poles[pi];
            const double win = 8.5 * sigma;
            const auto i0 = static_cast<std::ptrdiff_t>(
                std::ceil((p.omega - win - grid.omega_min) / grid.step));
            const auto i1 = static_cast<std::ptrdiff_t>(
                std::floor((p.omega + win - grid.omega_min) / grid.step));
            const std::size_t lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(i0, 0));
            const std::size_t hi =
                std::min<std::size_t>(static_cast<std::size_t>(std::max<std::ptrdiff_t>(i1, 0)),
                                      npts - 1);
            if (hi < lo) continue;
            k.gaussian_accumulate(buf.data() + lo, hi - lo + 1,
                                  grid.omega_min + static_cast<double>(lo) * grid.step,
                                  grid.step, p.omega, sigma, p.weight);
        }
    });
    // Merge in chunk order so the result does not depend on scheduling.
    for (const auto& buf : partial)
        kern::active().axpy(1.0, buf.data(), out.values.data(), npts);

    const double total = out.trapezoid_total();
    if (out.declared_total > 0.0 &&
        std::abs(total - out.declared_total) > 1e-6 * out.declared_total)
        throw numerical_error("broadened grid mass " + std::to_string(total) +
                              " deviates from pole total " +
                              std::to_string(out.declared_total) + " beyond 1e-6 relative");
    return out;
}

namespace {

void check_full_momentum_set(const std::vector<double>& qs, int n_sites) {
    if (static_cast<int>(qs.size()) != n_sites)
        throw validation_error("incomplete momentum set: need all " +
                               std::to_string(n_sites) + " momenta, got " +
                               std::to_string(qs.size()));
    std::vector<bool> seen(static_cast<std::size_t>(n_sites), false);
    for (double q : qs) {
        const double m = q * n_sites / (2.0 * std::numbers::pi);
        const auto mi = static_cast<long>(std::llround(m));
        if (std::abs(m - static_cast<double>(mi)) > 1e-9 || mi < 0 || mi >= n_sites)
            throw validation_error("momentum " + std::to_string(q) +
                                   " is not a lattice momentum");
        if (seen[static_cast<std::size_t>(mi)])
            throw validation_error("duplicate momentum index " + std::to_string(mi));
        seen[static_cast<std::size_t>(mi)] = true;
    }
}

} // namespace

SumRuleReport sum_rule_check(std::span<const LineSpectrum> spectra) {
    if (spectra.empty()) throw validation_error("incomplete momentum set: empty input");
    const int n = spectra.front().n_sites;
    std::vector<double> qs;
    for (const auto& ls : spectra) qs.push_back(ls.q);
    check_full_momentum_set(qs, n);
    double acc = 0.0;
    for (const auto& ls : spectra) acc += ls.total_weight();
    SumRuleReport rep;
    rep.n_q = n;
    rep.moment = acc / n;
    rep.deviation = rep.moment - 0.25;
    return rep;
}

SumRuleReport sum_rule_check(std::span<const SpectralGrid> grids, int n_sites) {
    if (grids.empty()) throw validation_error("incomplete momentum set: empty input");
    std::vector<double> qs;
    for (const auto& g : grids) qs.push_back(g.q);
    check_full_momentum_set(qs, n_sites);
    double acc = 0.0;
    for (const auto& g : grids) acc += g.trapezoid_total();
    SumRuleReport rep;
    rep.n_q = n_sites;
    rep.moment = acc / n_sites;
    rep.deviation = rep.moment - 0.25;
    return rep;
}

} // namespace qfiw
