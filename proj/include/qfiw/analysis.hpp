#pragma once

#include <cstddef>
#include <vector>

namespace qfiw {

struct FqPoint {
    double beta = 0.0;
    double f_q = 0.0;
    double sigma = 0.0;  // optional standard deviation of f_q
};

// Linearized power-log fit: f_q^{2/3} = a + b log(beta), so that
// f_q = (b log(T0 beta))^{3/2} with d_fit = b^{3/2} and t0_fit = e^{a/b}.
// d_fit/t0_fit are meaningful only for b > 0 (has_scaling).
struct ScalingFit {
    double intercept_a = 0.0;
    double slope_b = 0.0;
    double d_fit = 0.0;
    double t0_fit = 0.0;
    double r_squared = 0.0;
    double beta_min_used = 0.0;
    double beta_max_used = 0.0;
    int n_points = 0;
    bool has_scaling = false;
    bool weighted = false;
    std::vector<double> excluded_betas;
};

// OLS of f_q^{2/3} against log(beta) over points with beta >= beta_min
// (default 4). weighted = true propagates sigma through the 2/3 power and
// uses inverse-variance weights. Needs >= 3 usable points, all f_q > 0.
ScalingFit fit_log_scaling(const std::vector<FqPoint>& series, double beta_min = 4.0,
                           bool weighted = false);

// Removes the listed indices; the removed betas are recorded so a subsequent
// fit can carry them in excluded_betas. Removing everything is an error.
struct ExcludeResult {
    std::vector<FqPoint> kept;
    std::vector<double> excluded_betas;
};

ExcludeResult exclude_points(const std::vector<FqPoint>& series,
                             const std::vector<std::size_t>& indices);

// Index of the lowest-temperature (largest-beta) point.
std::size_t lowest_temperature_index(const std::vector<FqPoint>& series);

// f_q prediction at T from the fitted line. extrapolated marks targets below
// the fitted range; far_extrapolation marks > 10x beyond it (loud warning).
struct Prediction {
    double t = 0.0;
    double f_q_pred = 0.0;
    int depth = 1;
    bool extrapolated = false;
    bool far_extrapolation = false;
};

Prediction extrapolate(const ScalingFit& fit, double t_target);

} // namespace qfiw
