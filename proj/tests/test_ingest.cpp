#include "qfiw/errors.hpp"
#include "qfiw/ingest.hpp"
#include "qfiw/qfi.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace qfiw;

namespace {

std::filesystem::path tmp_dir() {
    const char* env = std::getenv("QFIW_TEST_TMP");
    std::filesystem::path p = env != nullptr ? env : std::filesystem::temp_directory_path();
    std::filesystem::create_directories(p);
    return p;
}

std::string write_file(const std::string& name, const std::string& content) {
    const auto path = tmp_dir() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CorrelationTable ed_table(int n, double beta, double dt, double t_max) {
    ChainSpec spec;
    spec.n_sites = n;
    const auto es = diagonalize(build_hamiltonian(spec));
    const auto ens = thermal_ensemble(es, beta);
    CorrelationTable tab;
    tab.n_sites = n;
    tab.center = n / 2;
    tab.dt = dt;
    tab.t_max = t_max;
    tab.beta = beta;
    testutil::synthesize_gxt(es, ens, tab.center, dt, t_max, tab.re, tab.im);
    return tab;
}

} // namespace

TEST_SUITE("ingest") {

TEST_CASE("minimal fixture parses") {
    const auto path = write_file("mini.csv",
                                 "# n_sites=2 center=1 dt=0.5 tmax=1.0 beta=2.0\n"
                                 "0,0,0.25,0\n0,0.5,0.2,0.01\n0,1,0.15,0.02\n"
                                 "1,0,0.25,0\n1,0.5,0.24,0.005\n1,1,0.22,0.01\n");
    const CorrelationTable tab = load_correlations(path);
    CHECK(tab.n_sites == 2);
    CHECK(tab.center == 1);
    CHECK(tab.n_times() == 3);
    CHECK(tab.re(0, 1) == doctest::Approx(0.2));
    CHECK(tab.im(1, 2) == doctest::Approx(0.01));
}

TEST_CASE("missing cell is rejected with the cell named") {
    const auto path = write_file("holes.csv",
                                 "# n_sites=2 center=1 dt=0.5 tmax=1.0 beta=2.0\n"
                                 "0,0,0.25,0\n0,0.5,0.2,0.01\n0,1,0.15,0.02\n"
                                 "1,0,0.25,0\n1,1,0.22,0.01\n");
    CHECK_THROWS_WITH_AS(load_correlations(path), doctest::Contains("(1, 0.5)"),
                         validation_error);
}

TEST_CASE("NaN and malformed input are rejected") {
    const auto nan_path = write_file("nan.csv",
                                     "# n_sites=1 center=0 dt=1 tmax=1 beta=1\n"
                                     "0,0,nan,0\n0,1,0.1,0\n");
    CHECK_THROWS_WITH_AS(load_correlations(nan_path), doctest::Contains("NaN"),
                         validation_error);
    const auto bad_header = write_file("badhdr.csv", "n_sites=1 center=0\n");
    CHECK_THROWS_AS(load_correlations(bad_header), validation_error);
    const auto missing_field = write_file("nofield.csv",
                                          "# n_sites=1 center=0 dt=1 tmax=1\n0,0,1,0\n");
    CHECK_THROWS_WITH_AS(load_correlations(missing_field), doctest::Contains("beta"),
                         validation_error);
}

TEST_CASE("ED-generated table round-trips bit-exactly") {
    const CorrelationTable tab = ed_table(4, 2.0, 0.1, 3.0);
    const auto p1 = (tmp_dir() / "roundtrip1.csv").string();
    const auto p2 = (tmp_dir() / "roundtrip2.csv").string();
    save_correlations(tab, p1);
    const CorrelationTable back = load_correlations(p1);
    save_correlations(back, p2);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(back.re == tab.re);
    CHECK(back.im == tab.im);
}

TEST_CASE("transform of a single synthetic line") {
    // G(x,t) = (w/N) cos(q(x-c)) e^{-i w0 t} transforms to one Gaussian line
    // of mass w at w0.
    const int n = 4;
    const double w0 = 1.3, w = 0.4, dt = 0.05, tmax = 60.0;
    CorrelationTable tab;
    tab.n_sites = n;
    tab.center = n / 2;
    tab.dt = dt;
    tab.t_max = tmax;
    tab.beta = 5.0;
    const auto nt = static_cast<Eigen::Index>(std::floor(tmax / dt + 0.5)) + 1;
    tab.re.setZero(n, nt);
    tab.im.setZero(n, nt);
    const double q = std::numbers::pi;
    for (int x = 0; x < n; ++x) {
        for (Eigen::Index k = 0; k < nt; ++k) {
            const double t = static_cast<double>(k) * dt;
            tab.re(x, k) = w / n * std::cos(q * (x - tab.center)) * std::cos(w0 * t);
            tab.im(x, k) = -w / n * std::cos(q * (x - tab.center)) * std::sin(w0 * t);
        }
    }
    const TransformResult r = transform_to_dsf(tab, q, 0.01, GridSpec{-5.0, 5.0, 0.005});
    CHECK(r.grid.trapezoid_total() == doctest::Approx(w).epsilon(1e-3));
    std::size_t imax = 0;
    for (std::size_t i = 1; i < r.grid.size(); ++i)
        if (r.grid.values[i] > r.grid.values[imax]) imax = i;
    CHECK(std::abs(r.grid.omega(imax) - w0) < 0.01);
}

TEST_CASE("q=0 spectrum of a conserving chain concentrates at omega = 0") {
    const CorrelationTable tab = ed_table(4, 2.0, 0.05, 40.0);
    const TransformResult r = transform_to_dsf(tab, 0.0, 0.01, GridSpec{-5.0, 5.0, 0.005});
    const double total = r.grid.trapezoid_total();
    double outside = 0.0;
    for (std::size_t i = 0; i < r.grid.size(); ++i)
        if (std::abs(r.grid.omega(i)) > 0.6) outside += r.grid.values[i] * r.grid.step;
    CHECK(total > 0.0);
    CHECK(outside < 1e-4 * total);
}

TEST_CASE("zero table transforms to a zero grid") {
    CorrelationTable tab;
    tab.n_sites = 2;
    tab.center = 1;
    tab.dt = 0.1;
    tab.t_max = 2.0;
    tab.beta = 1.0;
    tab.re.setZero(2, 21);
    tab.im.setZero(2, 21);
    const TransformResult r = transform_to_dsf(tab, std::numbers::pi, 0.01,
                                               GridSpec{-2.0, 2.0, 0.01});
    for (double v : r.grid.values) CHECK(v == 0.0);
    CHECK(r.escalations == 0);
}

TEST_CASE("roundtrip: Lehmann -> G(x,t) -> transform -> grid QFI") {
    // Tolerances are the measured behavior of the sqrt(2 eta) kernel at
    // eta = 0.01 (the tanh-weight convolution bias; it grows with beta).
    for (auto [beta, tol] : {std::pair{2.0, 1.5e-2}, std::pair{8.0, 6e-2}}) {
        const CorrelationTable tab = ed_table(6, beta, 0.05, 40.0);
        const TransformResult r =
            transform_to_dsf(tab, std::numbers::pi, 0.01, GridSpec{-8.0, 8.0, 0.005});
        const auto b = testutil::make_ed(6, beta, 3);
        const double f_direct = qfi_direct(b.es, b.ens, b.ops);
        const double f_grid = grid_quantities(r.grid).f_q;
        CHECK(std::abs(f_grid - f_direct) < tol);
        // and the grid agrees with the pipeline's own broadened spectrum
        const auto g = broaden(b.ls, r.achieved_eta, GridSpec{-8.0, 8.0, 0.005});
        const double f_broadened = grid_quantities(g).f_q;
        CHECK(std::abs(f_grid - f_broadened) < 1e-4);
    }
}

TEST_CASE("negativity escalation doubles eta and clips") {
    // A hard time cutoff with almost no damping rings strongly negative.
    const int n = 2;
    CorrelationTable tab;
    tab.n_sites = n;
    tab.center = 1;
    tab.dt = 0.05;
    tab.t_max = 8.0;
    tab.beta = 5.0;
    const auto nt = static_cast<Eigen::Index>(std::floor(tab.t_max / tab.dt + 0.5)) + 1;
    tab.re.setZero(n, nt);
    tab.im.setZero(n, nt);
    for (Eigen::Index k = 0; k < nt; ++k) {
        const double t = static_cast<double>(k) * tab.dt;
        for (int x = 0; x < n; ++x)
            tab.re(x, k) = std::cos(std::numbers::pi * (x - 1)) * std::cos(1.0 * t) * 0.25;
    }
    const TransformResult r = transform_to_dsf(tab, std::numbers::pi, 1e-4,
                                               GridSpec{-4.0, 4.0, 0.005});
    CHECK(r.escalations > 0);
    CHECK(r.achieved_eta > 1e-4);
    for (double v : r.grid.values) CHECK(v >= 0.0);
}

TEST_CASE("normalize_moment") {
    SUBCASE("moment 0.5 rescales by 0.5") {
        std::vector<SpectralGrid> grids;
        for (int m = 0; m < 2; ++m) {
            SpectralGrid g;
            g.q = std::numbers::pi * m;
            g.beta = 1.0;
            g.omega_min = -1.0;
            g.step = 0.01;
            g.values.assign(201, 0.25);  // trapezoid total 0.5 each
            grids.push_back(g);
        }
        const NormalizeResult r = normalize_moment(grids, 2);
        CHECK(r.scale == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(r.moment_after == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("exact ED grids need no rescaling") {
        const int n = 4;
        ChainSpec spec;
        spec.n_sites = n;
        const auto es = diagonalize(build_hamiltonian(spec));
        const auto ens = thermal_ensemble(es, 2.0);
        std::vector<SpectralGrid> grids;
        for (int m = 0; m < n; ++m) {
            const OperatorSpec op{n, m};
            grids.push_back(broaden(lehmann_dsf(es, ens, operator_matrix(es, op), op), 0.01,
                                    GridSpec{-8.0, 8.0, 0.005}));
        }
        const NormalizeResult r = normalize_moment(grids, n);
        CHECK(r.scale == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("single-q set is rejected") {
        std::vector<SpectralGrid> grids(1);
        grids[0].q = std::numbers::pi;
        grids[0].values.assign(11, 1.0);
        grids[0].step = 0.1;
        CHECK_THROWS_WITH_AS(normalize_moment(grids, 2),
                             doctest::Contains("incomplete momentum set"), validation_error);
    }
    SUBCASE("relative shape is preserved") {
        std::vector<SpectralGrid> grids;
        for (int m = 0; m < 2; ++m) {
            SpectralGrid g;
            g.q = std::numbers::pi * m;
            g.beta = 1.0;
            g.omega_min = 0.0;
            g.step = 0.01;
            for (int i = 0; i < 101; ++i) g.values.push_back(0.1 + 0.01 * i * (m + 1));
            grids.push_back(g);
        }
        const double ratio_before = grids[0].values[10] / grids[0].values[90];
        normalize_moment(grids, 2);
        CHECK(grids[0].values[10] / grids[0].values[90] ==
              doctest::Approx(ratio_before).epsilon(1e-12));
    }
}

TEST_CASE("remove_elastic") {
    const auto b = testutil::make_ed(2, 3.0, 1, Boundary::open);
    LineSpectrum with_elastic = b.ls;
    with_elastic.poles.insert(with_elastic.poles.begin() + 1, Pole{0.0, 0.05});
    const SpectralGrid g = broaden(with_elastic, 0.01, GridSpec{-4.0, 4.0, 0.005});

    SUBCASE("window 0 is the identity") {
        const RemoveElasticResult r = remove_elastic(g, 0.0);
        CHECK(r.removed_mass == doctest::Approx(0.0));
        CHECK(r.grid.values == g.values);
    }
    SUBCASE("window removes the known elastic mass") {
        // window at 3.5 sigma from both the elastic line and the gap pole
        const RemoveElasticResult r = remove_elastic(g, 0.5);
        CHECK(std::abs(r.removed_mass - 0.05) < 1e-3);
        for (std::size_t i = 0; i < r.grid.size(); ++i)
            if (std::abs(r.grid.omega(i)) < 0.5) CHECK(r.grid.values[i] == 0.0);
    }
    SUBCASE("negative window rejected") {
        CHECK_THROWS_AS(remove_elastic(g, -0.1), validation_error);
    }
}

TEST_CASE("spectral CSV round trip and per_2pi conversion") {
    const auto b = testutil::make_ed(4, 2.0, 2);
    const SpectralGrid g = broaden(b.ls, 0.01, GridSpec{-6.0, 6.0, 0.005});
    const auto p1 = (tmp_dir() / "spec1.csv").string();
    const auto p2 = (tmp_dir() / "spec2.csv").string();
    save_spectral_csv(g, p1);
    const SpectralGrid back = load_spectral_csv(p1);
    save_spectral_csv(back, p2);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(back.values == g.values);
    CHECK(back.beta == g.beta);

    SpectralGrid doubled = g;
    doubled.normalization = SpectralGrid::Norm::per_2pi;
    for (double& v : doubled.values) v *= 2.0 * std::numbers::pi;
    const SpectralGrid abs = to_absolute(doubled);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(abs.values[i] == doctest::Approx(g.values[i]).epsilon(1e-12));
}

TEST_CASE("spectral CSV rejects bad input") {
    const auto no_beta = write_file("nobeta.csv", "# q=3.14 eta=0.01 norm=absolute\n0,1\n1,1\n");
    CHECK_THROWS_WITH_AS(load_spectral_csv(no_beta), doctest::Contains("beta"),
                         validation_error);
    const auto neg = write_file("neg.csv",
                                "# q=3.14 beta=1 eta=0.01 norm=absolute\n0,1\n0.5,-0.2\n");
    CHECK_THROWS_WITH_AS(load_spectral_csv(neg), doctest::Contains("negative"),
                         validation_error);
    const auto nonuniform = write_file(
        "nonuniform.csv", "# q=3.14 beta=1 eta=0.01 norm=absolute\n0,1\n0.5,1\n0.7,1\n");
    CHECK_THROWS_WITH_AS(load_spectral_csv(nonuniform), doctest::Contains("uniform"),
                         validation_error);
}

}
