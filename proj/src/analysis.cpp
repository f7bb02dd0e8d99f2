#include "qfiw/analysis.hpp"
#include "qfiw/errors.hpp"
#include "qfiw/qfi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qfiw {

ScalingFit fit_log_scaling(const std::vector<FqPoint>& series, double beta_min,
                           bool weighted) {
    std::vector<double> x, y, w;
    double bmin = std::numeric_limits<double>::infinity(), bmax = 0.0;
    for (const auto& p : series) {
        if (p.beta < beta_min) continue;
        if (!(p.f_q > 0.0))
            throw validation_error("fit_log_scaling: nonpositive f_q = " +
                                   std::to_string(p.f_q) + " at beta = " +
                                   std::to_string(p.beta));
        x.push_back(std::log(p.beta));
        y.push_back(std::pow(p.f_q, 2.0 / 3.0));
        if (weighted) {
            if (!(p.sigma > 0.0))
                throw validation_error("weighted fit needs sigma > 0 at beta = " +
                                       std::to_string(p.beta));
            // sigma of f^{2/3} by linear propagation.
            const double sy = (2.0 / 3.0) * std::pow(p.f_q, -1.0 / 3.0) * p.sigma;
            w.push_back(1.0 / (sy * sy));
        } else {
            w.push_back(1.0);
        }
        bmin = std::min(bmin, p.beta);
        bmax = std::max(bmax, p.beta);
    }
    const std::size_t n = x.size();
    if (n < 3)
        throw validation_error("fit_log_scaling: need >= 3 points with beta >= " +
                               std::to_string(beta_min) + ", got " + std::to_string(n));

    double sw = 0.0, swx = 0.0, swy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
    }
    const double mx = swx / sw, my = swy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw validation_error("fit_log_scaling: degenerate beta range");

    ScalingFit fit;
    fit.slope_b = sxy / sxx;
    fit.intercept_a = my - fit.slope_b * mx;
    fit.beta_min_used = bmin;
    fit.beta_max_used = bmax;
    fit.n_points = static_cast<int>(n);
    fit.weighted = weighted;

    double ssres = 0.0, sstot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept_a + fit.slope_b * x[i]);
        ssres += w[i] * r * r;
        sstot += w[i] * (y[i] - my) * (y[i] - my);
    }
    fit.r_squared = sstot > 0.0 ? 1.0 - ssres / sstot : (ssres == 0.0 ? 1.0 : 0.0);

    fit.has_scaling = fit.slope_b > 0.0;
    if (fit.has_scaling) {
        fit.d_fit = std::pow(fit.slope_b, 1.5);
        fit.t0_fit = std::exp(fit.intercept_a / fit.slope_b);
    } else {
        fit.d_fit = std::numeric_limits<double>::quiet_NaN();
        fit.t0_fit = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

ExcludeResult exclude_points(const std::vector<FqPoint>& series,
                             const std::vector<std::size_t>& indices) {
    ExcludeResult out;
    std::vector<bool> drop(series.size(), false);
    for (std::size_t i : indices) {
        if (i >= series.size())
            throw validation_error("exclude index " + std::to_string(i) + " out of range");
        drop[i] = true;
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (drop[i]) {
            out.excluded_betas.push_back(series[i].beta);
        } else {
            out.kept.push_back(series[i]);
        }
    }
    if (out.kept.empty()) throw validation_error("all points excluded from the series");
    return out;
}

std::size_t lowest_temperature_index(const std::vector<FqPoint>& series) {
    if (series.empty()) throw validation_error("empty series");
    std::size_t best = 0;
    for (std::size_t i = 1; i < series.size(); ++i)
        if (series[i].beta > series[best].beta) best = i;
    return best;
}

Prediction extrapolate(const ScalingFit& fit, double t_target) {
    if (!fit.has_scaling)
        throw validation_error("extrapolate: fit has no diverging scaling (b <= 0)");
    if (!(t_target > 0.0)) throw validation_error("extrapolate: T must be > 0");
    Prediction out;
    out.t = t_target;
    const double y = fit.intercept_a + fit.slope_b * std::log(1.0 / t_target);
    out.f_q_pred = y > 0.0 ? std::pow(y, 1.5) : 0.0;
    out.depth = witnessed_depth(out.f_q_pred, 0, DepthMode::qfi).depth;
    const double t_low_edge = 1.0 / fit.beta_max_used;
    out.extrapolated = t_target < t_low_edge * (1.0 - 1e-12);
    out.far_extrapolation = t_target < 0.1 * t_low_edge;
    return out;
}

} // namespace qfiw
