#include "qfiw/analysis.hpp"
#include "qfiw/cft.hpp"
#include "qfiw/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace qfiw;

namespace {

std::vector<FqPoint> model_series(double d, double t0, const std::vector<double>& betas) {
    std::vector<FqPoint> out;
    for (double b : betas)
        out.push_back({b, d * std::pow(std::log(t0 * b), 1.5), 0.0});
    return out;
}

const std::vector<double> kBetas{4, 5, 6, 8, 10, 12, 16, 20, 25, 32, 40, 50, 64, 80, 100};

} // namespace

TEST_SUITE("analysis") {

TEST_CASE("self-fit of the synthetic model recovers D and T0") {
    const auto series = model_series(0.075, 4.5, kBetas);
    const ScalingFit fit = fit_log_scaling(series, 4.0);
    REQUIRE(fit.has_scaling);
    CHECK(std::abs(fit.d_fit - 0.075) < 1e-6);
    CHECK(std::abs(fit.t0_fit - 4.5) < 1e-6);
    CHECK(fit.r_squared > 1.0 - 1e-12);
    CHECK(fit.n_points == 15);
}

TEST_CASE("cft-route series fits the linearized form with r^2 > 0.99") {
    const CftParams p;
    std::vector<FqPoint> series;
    for (double b : kBetas) {
        const QfiReport rep = cft_report(1.0 / b, p);
        series.push_back({b, rep.f_q, 0.0});
    }
    const ScalingFit fit = fit_log_scaling(series, 4.0);
    REQUIRE(fit.has_scaling);
    CHECK(fit.r_squared > 0.99);
}

TEST_CASE("constant series has no diverging scaling") {
    std::vector<FqPoint> series;
    for (double b : kBetas) series.push_back({b, 1.25, 0.0});
    const ScalingFit fit = fit_log_scaling(series, 4.0);
    CHECK(!fit.has_scaling);
    CHECK(std::isnan(fit.d_fit));
    CHECK(std::isnan(fit.t0_fit));
    CHECK_THROWS_AS(extrapolate(fit, 0.01), validation_error);
}

TEST_CASE("fit preconditions") {
    CHECK_THROWS_AS(fit_log_scaling({{4, 1, 0}, {8, 2, 0}}, 4.0), validation_error);
    CHECK_THROWS_AS(fit_log_scaling({{4, 1, 0}, {8, -2, 0}, {16, 3, 0}}, 4.0),
                    validation_error);
    // beta_min filter leaves too few points
    CHECK_THROWS_AS(fit_log_scaling({{1, 1, 0}, {2, 2, 0}, {8, 3, 0}}, 4.0),
                    validation_error);
}

TEST_CASE("affine equivariance in beta rescaling") {
    const auto series = model_series(0.11, 3.0, kBetas);
    const ScalingFit base = fit_log_scaling(series, 0.0);
    const double c = 2.5;
    auto scaled = series;
    for (auto& p : scaled) p.beta *= c;
    const ScalingFit shifted = fit_log_scaling(scaled, 0.0);
    CHECK(shifted.slope_b == doctest::Approx(base.slope_b).epsilon(1e-12));
    CHECK(shifted.intercept_a ==
          doctest::Approx(base.intercept_a - base.slope_b * std::log(c)).epsilon(1e-10));
}

TEST_CASE("refit on the fit's own predictions reproduces coefficients") {
    const auto series = model_series(0.2, 6.0, kBetas);
    const ScalingFit fit = fit_log_scaling(series, 4.0);
    std::vector<FqPoint> pred;
    for (double b : kBetas) {
        const double y = fit.intercept_a + fit.slope_b * std::log(b);
        pred.push_back({b, std::pow(y, 1.5), 0.0});
    }
    const ScalingFit refit = fit_log_scaling(pred, 4.0);
    CHECK(refit.slope_b == doctest::Approx(fit.slope_b).epsilon(1e-12));
    CHECK(refit.intercept_a == doctest::Approx(fit.intercept_a).epsilon(1e-12));
}

TEST_CASE("weighted fit uses the sigma column") {
    auto series = model_series(0.075, 4.5, kBetas);
    for (auto& p : series) p.sigma = 0.01;
    // corrupt one point and give it a huge uncertainty: the weighted fit
    // should shrug it off, the unweighted one should not
    series[3].f_q *= 1.5;
    series[3].sigma = 100.0;
    const ScalingFit weighted = fit_log_scaling(series, 4.0, true);
    const ScalingFit unweighted = fit_log_scaling(series, 4.0, false);
    CHECK(std::abs(weighted.d_fit - 0.075) < 1e-4);
    CHECK(std::abs(unweighted.d_fit - 0.075) > 1e-3);
}

TEST_CASE("exclusions") {
    const auto series = model_series(0.075, 4.5, {4, 8, 16, 32, 64});
    SUBCASE("lowest-temperature point") {
        CHECK(lowest_temperature_index(series) == 4);  // beta = 64
        const ExcludeResult ex = exclude_points(series, {4});
        CHECK(ex.kept.size() == 4);
        REQUIRE(ex.excluded_betas.size() == 1);
        CHECK(ex.excluded_betas[0] == doctest::Approx(64.0));
        ScalingFit fit = fit_log_scaling(ex.kept, 4.0);
        fit.excluded_betas = ex.excluded_betas;
        CHECK(fit.n_points == 4);
    }
    SUBCASE("empty exclusion is the identity") {
        const ExcludeResult ex = exclude_points(series, {});
        CHECK(ex.kept.size() == series.size());
        CHECK(ex.excluded_betas.empty());
    }
    SUBCASE("excluding everything fails") {
        CHECK_THROWS_AS(exclude_points(series, {0, 1, 2, 3, 4}), validation_error);
    }
}

TEST_CASE("extrapolation from the anchored reference coefficients") {
    // Model pinned through the two reference anchor values f_q(0.01) = 5.9
    // and f_q(0.0027) = 7.7, i.e. a = 1.03444, b = 0.48439.
    std::vector<FqPoint> series;
    const double a = 1.0344385021, b = 0.4843899145;
    for (double be : kBetas)
        series.push_back({be, std::pow(a + b * std::log(be), 1.5), 0.0});
    const ScalingFit fit = fit_log_scaling(series, 4.0);
    REQUIRE(fit.has_scaling);

    const Prediction p1 = extrapolate(fit, 0.01);
    CHECK(p1.f_q_pred == doctest::Approx(5.9).epsilon(0.01));
    CHECK(p1.depth == 6);
    CHECK(!p1.extrapolated);  // beta = 100 is the fit edge

    const Prediction p2 = extrapolate(fit, 0.0027);
    CHECK(p2.f_q_pred == doctest::Approx(7.7).epsilon(0.01));
    CHECK(p2.depth >= 8);
    CHECK(p2.extrapolated);
    CHECK(!p2.far_extrapolation);

    const Prediction p3 = extrapolate(fit, 0.0005);
    CHECK(p3.far_extrapolation);

    // On the fitted curve itself at T = 1/beta_min there is no flag.
    const Prediction p4 = extrapolate(fit, 0.25);
    CHECK(!p4.extrapolated);
    CHECK(p4.f_q_pred ==
          doctest::Approx(std::pow(a + b * std::log(4.0), 1.5)).epsilon(1e-6));
}

}
