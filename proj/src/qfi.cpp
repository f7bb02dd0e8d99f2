#include "qfiw/qfi.hpp"
#include "qfiw/errors.hpp"
#include "qfiw/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qfiw {

const char* to_string(QfiRoute route) {
    switch (route) {
        case QfiRoute::direct: return "direct";
        case QfiRoute::spectral: return "spectral";
        case QfiRoute::cft: return "cft";
    }
    return "?";
}

double qfi_direct(const EigenSystem& es, const ThermalEnsemble& ens,
                  const std::vector<SectorOperator>& ops) {
    double f = 0.0;
    for (std::size_t b = 0; b < es.sectors.size(); ++b) {
        const auto& w = ens.weights[b];
        const auto& M = ops[b];
        const Eigen::Index d = es.sectors[b].energies.size();
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = i + 1; j < d; ++j) {
                const double s = w(i) + w(j);
                if (s < 1e-300) continue;
                const double diff = w(i) - w(j);
                if (diff == 0.0) continue;
                const double a2 = M.abs2(i, j);
                if (a2 == 0.0) continue;
                f += 4.0 * diff * diff / s * a2;  // both orderings of (i,j)
            }
        }
    }
    return f / es.spec.n_sites;
}

namespace {

// tanh(x/2) (1 - e^{-x}) = (1-e^{-x})^2/(1+e^{-x}), saturating to 1.
double qfi_weight(double x) {
    if (x > 700.0) return 1.0;
    const double u = -std::expm1(-x);
    return u * u / (2.0 - u);
}

double fermi(double x) {  // 1/(1 + e^{x})
    if (x > 700.0) return 0.0;
    return 1.0 / (1.0 + std::exp(x));
}

} // namespace

double qfi_spectral(const LineSpectrum& ls) {
    double f = 0.0;
    for (const Pole& p : ls.positive_poles()) f += 4.0 * p.weight * qfi_weight(ls.beta * p.omega);
    return f;
}

double epsilon_correction(const LineSpectrum& ls) {
    double e = 4.0 * ls.elastic_weight();
    for (const Pole& p : ls.positive_poles()) e += 16.0 * p.weight * fermi(ls.beta * p.omega);
    return e;
}

namespace {

GridQuantities grid_quantities_stride(const SpectralGrid& grid, std::size_t stride) {
    // Index of the first grid point with omega >= 0 (or 0 for half grids).
    std::size_t first = 0;
    if (grid.omega_min < 0.0)
        first = static_cast<std::size_t>(std::ceil(-grid.omega_min / grid.step - 1e-9));
    std::vector<double> fw, ew, sw;
    for (std::size_t i = first; i < grid.size(); i += stride) {
        const double x = grid.beta * grid.omega(i);
        const double v = grid.values[i];
        fw.push_back(4.0 * qfi_weight(x) * v);
        ew.push_back(16.0 * fermi(x) * v);
        sw.push_back((1.0 + (x > 700.0 ? 0.0 : std::exp(-x))) * v);
    }
    const double h = grid.step * static_cast<double>(stride);
    GridQuantities out;
    out.f_q = kern::trapezoid(fw.data(), fw.size(), h);
    out.epsilon = kern::trapezoid(ew.data(), ew.size(), h);
    out.s_q = kern::trapezoid(sw.data(), sw.size(), h);
    return out;
}

} // namespace

GridQuantities grid_quantities(const SpectralGrid& grid) {
    if (grid.quantity != SpectralGrid::Quantity::dsf)
        throw validation_error("grid route needs a DSF grid, not chi''");
    if (grid.size() < 4) throw validation_error("grid too small");
    GridQuantities fine = grid_quantities_stride(grid, 1);
    const GridQuantities coarse = grid_quantities_stride(grid, 2);
    fine.quad_error = std::max({std::abs(fine.f_q - coarse.f_q),
                                std::abs(fine.s_q - coarse.s_q),
                                std::abs(fine.epsilon - coarse.epsilon)}) / 3.0;
    return fine;
}

DepthResult witnessed_depth(double value, int n_sites, DepthMode mode) {
    if (!(value >= 0.0))
        throw validation_error("depth witness needs a nonnegative value, got " +
                               std::to_string(value));
    // Largest integer strictly below value (strict bound: value > k).
    int k = static_cast<int>(std::floor(value));
    if (static_cast<double>(k) == value) k -= 1;
    k = std::max(k, 0);

    DepthResult r;
    if (mode == DepthMode::qfi) {
        r.depth = 1 + k;
        r.bounding_k = k;
    } else {
        r.depth = std::max(1, k);
        r.bounding_k = std::max(1, k);
    }
    r.divisor_warning = (n_sites > 0 && r.bounding_k >= 1 && n_sites % r.bounding_k != 0);
    return r;
}

QfiReport report_from_exact(const EigenSystem& es, const ThermalEnsemble& ens,
                            const std::vector<SectorOperator>& ops, const OperatorSpec& op) {
    const LineSpectrum ls = lehmann_dsf(es, ens, ops, op);
    QfiReport rep;
    rep.f_q = qfi_direct(es, ens, ops);
    rep.s_q_times4 = 4.0 * static_structure(ls);
    rep.epsilon = epsilon_correction(ls);
    rep.beta = ens.beta;
    rep.route = QfiRoute::direct;
    rep.elastic_excluded = false;
    rep.n_sites = es.spec.n_sites;
    rep.q = op.q();
    const DepthResult dq = witnessed_depth(rep.f_q, rep.n_sites, DepthMode::qfi);
    const DepthResult ds = witnessed_depth(rep.s_q_times4, rep.n_sites, DepthMode::static_bound);
    rep.depth_qfi = dq.depth;
    rep.divisor_warning_qfi = dq.divisor_warning;
    rep.depth_static = ds.depth;
    rep.divisor_warning_static = ds.divisor_warning;
    return rep;
}

QfiReport report_from_lines(const LineSpectrum& ls, bool inelastic_witness) {
    QfiReport rep;
    rep.f_q = qfi_spectral(ls);
    rep.s_q_times4 = 4.0 * static_structure(ls);
    rep.epsilon = epsilon_correction(ls);
    if (inelastic_witness) {
        const double w_el = ls.elastic_weight();
        rep.s_q_times4 -= 4.0 * w_el;
        rep.epsilon -= 4.0 * w_el;  // keep f = 4S - eps intact
    }
    rep.beta = ls.beta;
    rep.route = QfiRoute::spectral;
    rep.elastic_excluded = inelastic_witness;
    rep.n_sites = ls.n_sites;
    rep.q = ls.q;
    const DepthResult dq = witnessed_depth(rep.f_q, rep.n_sites, DepthMode::qfi);
    const DepthResult ds = witnessed_depth(rep.s_q_times4, rep.n_sites, DepthMode::static_bound);
    rep.depth_qfi = dq.depth;
    rep.divisor_warning_qfi = dq.divisor_warning;
    rep.depth_static = ds.depth;
    rep.divisor_warning_static = ds.divisor_warning;
    return rep;
}

QfiReport report_from_grid(const SpectralGrid& grid, bool elastic_excluded) {
    const GridQuantities g = grid_quantities(grid);
    QfiReport rep;
    rep.f_q = g.f_q;
    rep.s_q_times4 = 4.0 * g.s_q;
    rep.epsilon = g.epsilon;
    rep.beta = grid.beta;
    rep.route = QfiRoute::spectral;
    rep.elastic_excluded = elastic_excluded;
    rep.n_sites = 0;
    rep.q = grid.q;
    const DepthResult dq = witnessed_depth(std::max(rep.f_q, 0.0), 0, DepthMode::qfi);
    const DepthResult ds =
        witnessed_depth(std::max(rep.s_q_times4, 0.0), 0, DepthMode::static_bound);
    rep.depth_qfi = dq.depth;
    rep.depth_static = ds.depth;
    return rep;
}

TqResult t_q_solve(const std::function<double(double)>& epsilon_of_t, double t_lo,
                   double t_hi, int samples, double rel_tol) {
    if (!(t_lo > 0.0) || !(t_hi > t_lo))
        throw validation_error("t_q_solve needs 0 < t_lo < t_hi");
    samples = std::max(samples, 3);

    std::vector<double> ts(static_cast<std::size_t>(samples));
    std::vector<double> es(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        ts[i] = t_lo + (t_hi - t_lo) * i / (samples - 1);
        es[i] = epsilon_of_t(ts[i]);
    }

    TqResult r;
    r.eps_at_lo = es.front();
    r.eps_at_hi = es.back();
    for (int i = 1; i < samples; ++i)
        if (es[i] < es[i - 1] - 1e-12) r.monotone_warning = true;

    int seg = -1;
    for (int i = 1; i < samples; ++i) {
        if ((es[i - 1] - 1.0) * (es[i] - 1.0) <= 0.0) {
            seg = i;
            break;
        }
    }
    if (seg < 0) {
        r.t_q = t_hi;
        r.crossed = false;
        return r;
    }

    double a = ts[seg - 1], b = ts[seg];
    double fa = es[seg - 1] - 1.0;
    for (int it = 0; it < 200 && (b - a) > rel_tol * b; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = epsilon_of_t(m) - 1.0;
        if (fa * fm <= 0.0) {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    r.t_q = 0.5 * (a + b);
    r.crossed = true;
    return r;
}

UniversalTq t_q_universal(const CriticalExponents& ce) {
    if (std::abs(ce.eta_anom - 1.0) < 1e-12)
        throw validation_error("scaling form breaks down at eta_anom = 1");
    const double p = (1.0 - ce.eta_anom) * ce.nu;
    if (std::abs(p - 1.0) < 1e-12)
        throw validation_error("(1 - eta) nu = 1: T_Q exponent undefined");
    UniversalTq out;
    out.exponent = 1.0 / (p - 1.0);
    out.t_q = std::pow(ce.amplitude_a * ce.universal_d, out.exponent);
    return out;
}

double epsilon_universal(const CriticalExponents& ce, double t) {
    const double p = (1.0 - ce.eta_anom) * ce.nu;
    return ce.amplitude_a * ce.universal_d * std::pow(t, 1.0 - p);
}

PowerLawScaling power_law_qfi_scaling(const CriticalExponents& ce, double t) {
    if (!(ce.z > 0.0)) throw validation_error("dynamical exponent z must be > 0");
    PowerLawScaling out;
    out.delta_q = ce.delta_q();
    out.sub_power_law = std::abs(out.delta_q) < 1e-12;
    out.scale = std::pow(t, -out.delta_q / ce.z);
    return out;
}

} // namespace qfiw
