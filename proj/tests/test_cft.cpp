#include "qfiw/cft.hpp"
#include "qfiw/errors.hpp"
#include "qfiw/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

using namespace qfiw;

namespace {

struct FixtureRow {
    std::string kind;
    double t, omega, value;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    REQUIRE_MESSAGE(bool(in), "missing fixture ", path,
                    " (tests run from the repository root)");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        rows.push_back(cols);
    }
    return rows;
}

} // namespace

TEST_SUITE("cft") {

TEST_CASE("log_gamma special points") {
    CHECK(std::abs(log_gamma({1.0, 0.0})) < 1e-14);
    CHECK(std::abs(log_gamma({2.0, 0.0})) < 1e-14);
    CHECK(log_gamma({0.5, 0.0}).real() ==
          doctest::Approx(0.5 * std::log(std::acos(-1.0))).epsilon(1e-14));
    CHECK_THROWS_AS(log_gamma({0.0, 0.0}), validation_error);
    CHECK_THROWS_AS(log_gamma({-3.0, 0.0}), validation_error);
    // conjugation symmetry
    const auto a = log_gamma({0.3, 0.7});
    const auto b = log_gamma({0.3, -0.7});
    CHECK(a.real() == doctest::Approx(b.real()).epsilon(1e-14));
    CHECK(a.imag() == doctest::Approx(-b.imag()).epsilon(1e-14));
}

TEST_CASE("log_gamma against the arbitrary-precision table") {
    const auto rows = read_csv("tests/fixtures/lgamma_reference.csv");
    REQUIRE(rows.size() > 10);
    int checked = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 4);
        const std::complex<double> z(std::stod(rows[i][0]), std::stod(rows[i][1]));
        const std::complex<double> want(std::stod(rows[i][2]), std::stod(rows[i][3]));
        const std::complex<double> got = log_gamma(z);
        // Compare through exp: immune to any 2*pi*i branch offset from the
        // reflection path, and it is the contract that matters downstream.
        const std::complex<double> ratio = std::exp(got - want);
        CHECK_MESSAGE(std::abs(ratio - 1.0) < 1e-12, "z = ", rows[i][0], " + ", rows[i][1],
                      "i: |exp(lg)/Gamma - 1| = ", std::abs(ratio - 1.0));
        if (z.real() >= 0.5) {
            // principal branch straight comparison where no reflection occurs
            CHECK(std::abs(got - want) < 1e-12 * (1.0 + std::abs(want)));
        }
        ++checked;
    }
    CHECK(checked >= 40);
}

TEST_CASE("delta_eff") {
    const CftParams p;
    SUBCASE("frozen value at T = 0.01") {
        CHECK(delta_eff(0.01, p) == doctest::Approx(0.22953921521323598).epsilon(1e-12));
    }
    SUBCASE("zero at T = T0 e^{-1/2}") {
        CHECK(std::abs(delta_eff(4.5 * std::exp(-0.5), p)) < 1e-14);
    }
    SUBCASE("approaches 1/4 from below as T -> 0") {
        double last = delta_eff(0.1, p);
        for (double t : {1e-3, 1e-6, 1e-12, 1e-100, 1e-300}) {
            const double d = delta_eff(t, p);
            CHECK(d > last);
            CHECK(d < 0.25);
            last = d;
        }
        CHECK(delta_eff(1e-300, p) == doctest::Approx(0.25).epsilon(1e-3));
    }
    SUBCASE("domain errors") {
        CHECK_THROWS_AS(delta_eff(4.5, p), validation_error);
        CHECK_THROWS_AS(delta_eff(5.0, p), validation_error);
        CHECK_THROWS_AS(delta_eff(0.0, p), validation_error);
    }
}

TEST_CASE("chi'' and S against the arbitrary-precision table") {
    const CftParams p;
    const auto rows = read_csv("tests/fixtures/cft_reference.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::string& kind = rows[i][0];
        const double t = std::stod(rows[i][1]);
        const double omega = std::stod(rows[i][2]);
        const double want = std::stod(rows[i][3]);
        if (kind == "delta") {
            CHECK(delta_eff(t, p) == doctest::Approx(want).epsilon(1e-12));
        } else if (kind == "chi_imag") {
            CHECK(chi_imag_cft(omega, t, p) == doctest::Approx(want).epsilon(1e-10));
        } else if (kind == "dsf") {
            CHECK(dsf_cft(omega, t, p) == doctest::Approx(want).epsilon(1e-10));
        } else if (kind == "static") {
            CHECK(static_cft(t, p) == doctest::Approx(want).epsilon(1e-10));
        } else if (kind == "epsilon") {
            CHECK(epsilon_cft(t, p) == doctest::Approx(want).epsilon(5e-8));
        }
    }
}

TEST_CASE("chi'' structure") {
    const CftParams p;
    SUBCASE("exact zero at omega = 0 and oddness") {
        CHECK(chi_imag_cft(0.0, 0.05, p) == 0.0);
        for (double w : {0.01, 0.3, 1.7}) {
            CHECK(chi_imag_cft(-w, 0.05, p) ==
                  doctest::Approx(-chi_imag_cft(w, 0.05, p)).epsilon(1e-14));
        }
    }
    SUBCASE("positive for omega > 0 across the validity region") {
        for (double t : {0.005, 0.02, 0.1, 0.5, 2.0}) {
            for (double w : {1e-4, 0.01, 0.1, 0.5, 2.0, 10.0}) {
                CHECK(chi_imag_cft(w, t, p) > 0.0);
            }
        }
    }
    SUBCASE("outside the validity region is rejected") {
        CHECK_THROWS_AS(chi_imag_cft(0.1, 4.0, p), validation_error);
        CftParams small;
        small.t0 = 0.5;
        CHECK_THROWS_AS(chi_imag_cft(0.1, 1.0, small), validation_error);
    }
}

TEST_CASE("dsf detailed balance and high-frequency limit") {
    const CftParams p;
    const double t = 0.05;
    for (double w : {0.02, 0.3, 1.0}) {
        const double sp = dsf_cft(w, t, p);
        const double sm = dsf_cft(-w, t, p);
        CHECK(sm == doctest::Approx(sp * std::exp(-w / t)).epsilon(1e-12));
        CHECK(sp >= 0.0);
    }
    const double w = 50 * t;
    CHECK(dsf_cft(w, t, p) ==
          doctest::Approx(chi_imag_cft(w, t, p) / std::acos(-1.0)).epsilon(1e-10));
    // finite omega -> 0 limit
    const double s0 = dsf_cft(0.0, t, p);
    CHECK(std::isfinite(s0));
    CHECK(s0 > 0.0);
    CHECK(dsf_cft(1e-9, t, p) == doctest::Approx(s0).epsilon(1e-4));
}

TEST_CASE("static_cft structure") {
    const CftParams p;
    SUBCASE("positive and divergent toward T -> 0") {
        double last = static_cft(0.2, p);
        for (double t : {0.1, 0.05, 0.01, 0.001}) {
            const double s = static_cft(t, p);
            CHECK(s > last);
            last = s;
        }
    }
    SUBCASE("asymptotic (log(T0/T))^{3/2} ratio settles") {
        // The ratio drifts at the percent level between 1e-4 and 1e-6 (the
        // Gamma-pole factor converges like 1/log) and tightens further down.
        const auto ratio = [&](double t) {
            return static_cft(t, p) / std::pow(std::log(p.t0 / t), 1.5);
        };
        CHECK(std::abs(ratio(1e-6) / ratio(1e-4) - 1.0) < 0.10);
        CHECK(std::abs(ratio(1e-10) / ratio(1e-8) - 1.0) < 0.02);
        CHECK(std::abs(ratio(1e-14) / ratio(1e-12) - 1.0) < 0.01);
    }
    SUBCASE("validity region enforced") {
        CHECK_THROWS_AS(static_cft(4.0, p), validation_error);
    }
}

TEST_CASE("epsilon_cft quadrature") {
    const CftParams p;
    SUBCASE("cutoff insensitivity") {
        const double base = epsilon_cft(0.05, p);
        CHECK(epsilon_cft(0.05, p, {1e-8, 100.0}) == doctest::Approx(base).epsilon(1e-7));
        CHECK(epsilon_cft(0.05, p, {1e-10, 50.0}) == doctest::Approx(base).epsilon(1e-7));
    }
    SUBCASE("decreasing in T on the sampled range") {
        // The literal closed forms carry a sqrt(log(T0/T)) amplitude, so the
        // correction grows mildly as T drops.
        double last = epsilon_cft(0.2, p);
        for (double t : {0.1, 0.05, 0.02, 0.01, 0.005}) {
            const double e = epsilon_cft(t, p);
            CHECK(e > last);
            last = e;
        }
    }
    SUBCASE("bad cutoffs rejected") {
        CHECK_THROWS_AS(epsilon_cft(0.05, p, {0.0, 50.0}), validation_error);
        CHECK_THROWS_AS(epsilon_cft(0.05, p, {1.0, 0.5}), validation_error);
    }
}

TEST_CASE("cft route report and monotone f_q") {
    const CftParams p;
    double last = 0.0;
    for (double t : {0.1, 0.05, 0.02, 0.01, 0.005}) {
        const QfiReport rep = cft_report(t, p);
        CHECK(rep.route == QfiRoute::cft);
        CHECK(rep.f_q == doctest::Approx(rep.s_q_times4 - rep.epsilon));
        CHECK(rep.f_q > last);  // increases as T decreases
        last = rep.f_q;
    }
}

TEST_CASE("adaptive quadrature sanity") {
    const auto r1 = integrate_adaptive([](double x) { return std::exp(-x); }, 0.0, 40.0);
    CHECK(r1.value == doctest::Approx(1.0).epsilon(1e-10));
    const auto r2 = integrate_adaptive([](double x) { return std::sin(x); }, 0.0,
                                       std::acos(-1.0));
    CHECK(r2.value == doctest::Approx(2.0).epsilon(1e-10));
    CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 1.0, 0.0),
                    validation_error);
}

}
