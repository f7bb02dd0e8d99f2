// qfiw: QFI / structure-factor entanglement-witness pipelines for spin-1/2
// chains. Subcommands: ed | cft | qfi | fit | ingest.
#include "qfiw/analysis.hpp"
#include "qfiw/cft.hpp"
#include "qfiw/errors.hpp"
#include "qfiw/ingest.hpp"
#include "qfiw/qfi.hpp"
#include "qfiw/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

namespace {

using json = nlohmann::ordered_json;
using namespace qfiw;

constexpr double kKelvinPerMev = 11.604518;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open input file: " + path);
    std::uint64_t h = 1469598103934665603ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Sidecar manifest: parameters and input digests pin the run; payload files
// themselves carry no timestamps so identical manifests give bit-identical
// outputs.
void write_manifest(const std::string& out_path, const std::string& subcommand,
                    const json& params, const json& inputs) {
    json m;
    m["subcommand"] = subcommand;
    m["parameters"] = params;
    m["inputs"] = inputs;
    m["tool_version"] = kVersion;
    m["timestamp"] = utc_timestamp();
    std::ofstream out(out_path + ".manifest.json");
    if (!out) throw validation_error("cannot write manifest: " + out_path + ".manifest.json");
    out << m.dump(2) << "\n";
}

json report_to_json(const QfiReport& rep, std::optional<double> j_mev) {
    json j;
    j["f_q"] = rep.f_q;
    j["s_q_times4"] = rep.s_q_times4;
    j["epsilon"] = rep.epsilon;
    j["depth_qfi"] = rep.depth_qfi;
    j["depth_static"] = rep.depth_static;
    j["beta"] = rep.beta;
    j["route"] = to_string(rep.route);
    j["elastic_excluded"] = rep.elastic_excluded;
    j["divisor_warning_qfi"] = rep.divisor_warning_qfi;
    j["divisor_warning_static"] = rep.divisor_warning_static;
    j["n_sites"] = rep.n_sites;
    j["q"] = rep.q;
    if (j_mev) {
        j["j_mev"] = *j_mev;
        j["t_kelvin"] = (1.0 / rep.beta) * (*j_mev) * kKelvinPerMev;
    }
    return j;
}

json fit_to_json(const ScalingFit& fit) {
    json j;
    j["slope_b"] = fit.slope_b;
    j["intercept_a"] = fit.intercept_a;
    if (fit.has_scaling) {
        j["d_fit"] = fit.d_fit;
        j["t0_fit"] = fit.t0_fit;
    } else {
        j["d_fit"] = nullptr;
        j["t0_fit"] = nullptr;
    }
    j["r_squared"] = fit.r_squared;
    j["beta_min"] = fit.beta_min_used;
    j["beta_max"] = fit.beta_max_used;
    j["n_points"] = fit.n_points;
    j["has_scaling"] = fit.has_scaling;
    j["weighted"] = fit.weighted;
    j["excluded_points"] = fit.excluded_betas;
    return j;
}

OperatorSpec parse_q_token(int n_sites, const std::string& token) {
    if (token == "pi") return OperatorSpec::at_pi(n_sites);
    if (token == "pi/2") {
        if (n_sites % 4 != 0)
            throw validation_error("q = pi/2 is incommensurate with n_sites = " +
                                   std::to_string(n_sites));
        return OperatorSpec{n_sites, n_sites / 4};
    }
    return OperatorSpec::from_wavenumber(n_sites, std::stod(token));
}

struct GlobalOpts {
    std::optional<double> j_mev;
};

// ---------------------------------------------------------------- ed

int cmd_ed(int n, double beta, const std::string& q_token, double anisotropy,
           const std::string& boundary, double eta, std::optional<double> grid_min,
           std::optional<double> grid_max, double grid_step, const std::string& out,
           const GlobalOpts& g) {
    ChainSpec spec;
    spec.n_sites = n;
    spec.anisotropy = anisotropy;
    if (boundary == "periodic") {
        spec.boundary = Boundary::periodic;
    } else if (boundary == "open") {
        spec.boundary = Boundary::open;
    } else {
        throw validation_error("boundary must be periodic or open");
    }
    spec.validate();
    const OperatorSpec op = parse_q_token(n, q_token);

    const auto blocks = build_hamiltonian(spec);
    const auto es = diagonalize(blocks);
    const auto ens = thermal_ensemble(es, beta);
    const auto ops = operator_matrix(es, op);
    const auto ls = lehmann_dsf(es, ens, ops, op);

    const double sigma = std::sqrt(2.0 * eta);
    GridSpec gs = GridSpec::covering(ls, sigma, grid_step);
    if (grid_min) gs.omega_min = *grid_min;
    if (grid_max) gs.omega_max = *grid_max;
    const SpectralGrid grid = broaden(ls, eta, gs);

    const QfiReport direct = report_from_exact(es, ens, ops, op);
    const QfiReport spectral = report_from_lines(ls);

    save_spectral_csv(grid, out + "_spectrum.csv");
    json rep;
    rep["reports"] = json::array({report_to_json(direct, g.j_mev),
                                  report_to_json(spectral, g.j_mev)});
    rep["route_disagreement"] = std::abs(direct.f_q - spectral.f_q);
    rep["ground_energy"] = es.ground_energy;
    std::ofstream jout(out + "_report.json");
    jout << rep.dump(2) << "\n";

    json params;
    params["n"] = n;
    params["beta"] = beta;
    params["q"] = q_token;
    params["anisotropy"] = anisotropy;
    params["boundary"] = boundary;
    params["eta"] = eta;
    params["grid_min"] = gs.omega_min;
    params["grid_max"] = gs.omega_max;
    params["grid_step"] = grid_step;
    if (g.j_mev) params["j_mev"] = *g.j_mev;
    write_manifest(out, "ed", params, json::object());
    std::cout << "f_q(direct) = " << direct.f_q << "  depth >= " << direct.depth_qfi
              << "  (4S = " << direct.s_q_times4 << ", epsilon = " << direct.epsilon << ")\n";
    return 0;
}

// ---------------------------------------------------------------- cft

int cmd_cft(double d, double t0, std::vector<double> temps, double tmin, double tmax,
            int tpoints, double omega_min_rel, double omega_max_rel, const std::string& out,
            const GlobalOpts& g) {
    CftParams p;
    p.amplitude_d = d;
    p.t0 = t0;
    p.validate();
    EpsilonCutoffs cut{omega_min_rel, omega_max_rel};

    if (temps.empty()) {
        if (!(tmin > 0.0) || !(tmax > tmin) || tpoints < 2)
            throw validation_error("cft needs --temp values or a valid --tmin/--tmax grid");
        for (int i = 0; i < tpoints; ++i)
            temps.push_back(tmin * std::pow(tmax / tmin, static_cast<double>(i) / (tpoints - 1)));
    }
    for (double t : temps)
        if (!in_validity_region(t, p))
            throw validation_error("temperature " + std::to_string(t) +
                                   " is outside the validity region T < T0 e^{-1/2}");

    std::vector<QfiReport> reports;
    reports.reserve(temps.size());
    for (double t : temps) reports.push_back(cft_report(t, p, cut));

    // epsilon(T) = 1 crossing over the canonical bracket, clipped to validity.
    const double hi = std::min(0.2, 0.9 * t0 * std::exp(-0.5));
    const double lo = std::min(0.005, hi / 40.0);
    const TqResult tq = t_q_solve([&](double t) { return epsilon_cft(t, p, cut); }, lo, hi);

    std::ofstream csv(out);
    if (!csv) throw validation_error("cannot write " + out);
    csv << "# d=" << fmt17(d) << " t0=" << fmt17(t0) << " t_q=" << fmt17(tq.t_q)
        << " t_q_crossed=" << (tq.crossed ? 1 : 0) << "\n";
    csv << "T,S_pi,epsilon,f_q,depth,t_q" << (g.j_mev ? ",T_kelvin" : "") << "\n";
    for (std::size_t i = 0; i < temps.size(); ++i) {
        csv << fmt17(temps[i]) << "," << fmt17(reports[i].s_q_times4 / 4.0) << ","
            << fmt17(reports[i].epsilon) << "," << fmt17(reports[i].f_q) << ","
            << reports[i].depth_qfi << "," << fmt17(tq.t_q);
        if (g.j_mev) csv << "," << fmt17(temps[i] * (*g.j_mev) * kKelvinPerMev);
        csv << "\n";
    }

    json params;
    params["d"] = d;
    params["t0"] = t0;
    params["temps"] = temps;
    params["omega_min_rel"] = omega_min_rel;
    params["omega_max_rel"] = omega_max_rel;
    if (g.j_mev) params["j_mev"] = *g.j_mev;
    write_manifest(out, "cft", params, json::object());
    std::cout << "t_q = " << tq.t_q << (tq.crossed ? "" : " (no crossing in bracket)")
              << ", wrote " << temps.size() << " temperatures to " << out << "\n";
    return 0;
}

// ---------------------------------------------------------------- qfi

int cmd_qfi(const std::string& in, double elastic_window, const std::string& out,
            const GlobalOpts& g) {
    SpectralGrid grid = to_absolute(load_spectral_csv(in));
    double removed = 0.0;
    bool excluded = false;
    if (elastic_window > 0.0) {
        auto r = remove_elastic(grid, elastic_window);
        grid = std::move(r.grid);
        removed = r.removed_mass;
        excluded = true;
    }
    const QfiReport rep = report_from_grid(grid, excluded);
    const GridQuantities gq = grid_quantities(grid);

    json j = report_to_json(rep, g.j_mev);
    j["quad_error"] = gq.quad_error;
    j["elastic_window"] = elastic_window;
    j["removed_elastic_mass"] = removed;
    std::ofstream jout(out);
    if (!jout) throw validation_error("cannot write " + out);
    jout << j.dump(2) << "\n";

    json params;
    params["in"] = in;
    params["elastic_window"] = elastic_window;
    if (g.j_mev) params["j_mev"] = *g.j_mev;
    json inputs;
    inputs[in] = fnv1a64_file(in);
    write_manifest(out, "qfi", params, inputs);
    std::cout << "f_q = " << rep.f_q << "  depth >= " << rep.depth_qfi << "\n";
    return 0;
}

// ---------------------------------------------------------------- fit

std::vector<FqPoint> load_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open series file: " + path);
    std::vector<FqPoint> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                cols.push_back(cur);
                cur.clear();
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                cur.push_back(c);
            }
        }
        cols.push_back(cur);
        if (!cols.empty() && cols[0] == "beta") continue;
        if (cols.size() != 2 && cols.size() != 3)
            throw validation_error(path + ":" + std::to_string(lineno) +
                                   ": expected beta,f_q[,sigma]");
        FqPoint p;
        try {
            p.beta = std::stod(cols[0]);
            p.f_q = std::stod(cols[1]);
            if (cols.size() == 3) p.sigma = std::stod(cols[2]);
        } catch (const std::exception&) {
            throw validation_error(path + ":" + std::to_string(lineno) + ": malformed number");
        }
        out.push_back(p);
    }
    if (out.empty()) throw validation_error(path + ": empty series");
    return out;
}

int cmd_fit(const std::string& in, double beta_min, bool exclude_lowest,
            std::vector<std::size_t> exclude, bool weighted, std::vector<double> targets,
            const std::string& out, const GlobalOpts& g) {
    std::vector<FqPoint> series = load_series(in);
    if (exclude_lowest) exclude.push_back(lowest_temperature_index(series));
    ExcludeResult ex = exclude_points(series, exclude);

    ScalingFit fit = fit_log_scaling(ex.kept, beta_min, weighted);
    fit.excluded_betas = ex.excluded_betas;

    json j;
    j["fit"] = fit_to_json(fit);
    json preds = json::array();
    for (double t : targets) {
        const Prediction p = extrapolate(fit, t);
        json pj;
        pj["t"] = p.t;
        pj["f_q_pred"] = p.f_q_pred;
        pj["depth"] = p.depth;
        pj["extrapolated"] = p.extrapolated;
        pj["far_extrapolation"] = p.far_extrapolation;
        if (g.j_mev) pj["t_kelvin"] = p.t * (*g.j_mev) * kKelvinPerMev;
        preds.push_back(pj);
        if (p.far_extrapolation)
            std::cerr << "warning: T = " << t << " is more than 10x beyond the fitted range;"
                      << " log-scaling asymptotics only\n";
    }
    j["predictions"] = preds;
    std::ofstream jout(out);
    if (!jout) throw validation_error("cannot write " + out);
    jout << j.dump(2) << "\n";

    json params;
    params["in"] = in;
    params["beta_min"] = beta_min;
    params["exclude_lowest"] = exclude_lowest;
    params["exclude"] = exclude;
    params["weighted"] = weighted;
    params["targets"] = targets;
    json inputs;
    inputs[in] = fnv1a64_file(in);
    write_manifest(out, "fit", params, inputs);
    if (fit.has_scaling)
        std::cout << "d_fit = " << fit.d_fit << "  t0_fit = " << fit.t0_fit
                  << "  r^2 = " << fit.r_squared << "\n";
    else
        std::cout << "no diverging scaling (slope <= 0), r^2 = " << fit.r_squared << "\n";
    return 0;
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const std::string& in, std::vector<std::string> q_tokens, double eta,
               bool normalize, double grid_min, double grid_max, double grid_step,
               const std::string& prefix, const GlobalOpts&) {
    const CorrelationTable tab = load_correlations(in);
    std::vector<int> q_indices;
    if (q_tokens.empty() || (q_tokens.size() == 1 && q_tokens[0] == "all")) {
        for (int m = 0; m < tab.n_sites; ++m) q_indices.push_back(m);
    } else {
        for (const auto& tok : q_tokens)
            q_indices.push_back(parse_q_token(tab.n_sites, tok).q_index);
    }

    GridSpec gs{grid_min, grid_max, grid_step};
    std::vector<SpectralGrid> grids;
    json diag = json::array();
    for (int m : q_indices) {
        const double q = 2.0 * std::numbers::pi * m / tab.n_sites;
        TransformResult r = transform_to_dsf(tab, q, eta, gs);
        json dj;
        dj["q_index"] = m;
        dj["achieved_eta"] = r.achieved_eta;
        dj["escalations"] = r.escalations;
        dj["max_negativity"] = r.max_negativity;
        dj["clipped_mass"] = r.clipped_mass;
        diag.push_back(dj);
        grids.push_back(std::move(r.grid));
    }

    json norm_info;
    if (normalize) {
        const NormalizeResult nr = normalize_moment(grids, tab.n_sites);
        norm_info["scale"] = nr.scale;
        norm_info["moment_before"] = nr.moment_before;
        norm_info["moment_after"] = nr.moment_after;
    }

    for (std::size_t i = 0; i < grids.size(); ++i)
        save_spectral_csv(grids[i], prefix + "_q" + std::to_string(q_indices[i]) + ".csv");

    json params;
    params["in"] = in;
    params["q_indices"] = q_indices;
    params["eta"] = eta;
    params["normalize"] = normalize;
    params["grid_min"] = grid_min;
    params["grid_max"] = grid_max;
    params["grid_step"] = grid_step;
    params["transform_diagnostics"] = diag;
    if (!norm_info.empty()) params["normalization"] = norm_info;
    json inputs;
    inputs[in] = fnv1a64_file(in);
    write_manifest(prefix, "ingest", params, inputs);
    std::cout << "wrote " << grids.size() << " spectral grids with prefix " << prefix << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-temperature multipartite-entanglement witnesses for spin-1/2 chains"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    GlobalOpts g;
    double j_mev_val = 0.0;
    auto* jflag = app.add_option("--j-mev", j_mev_val,
                                 "exchange coupling J in meV for material-unit reporting");

    // ed
    auto* ed = app.add_subcommand("ed", "exact diagonalization pipeline");
    int ed_n = 8;
    double ed_beta = 1.0, ed_aniso = 1.0, ed_eta = 0.01, ed_step = 0.005;
    std::string ed_q = "pi", ed_boundary = "periodic", ed_out = "ed";
    double ed_gmin_v = 0.0, ed_gmax_v = 0.0;
    ed->add_option("--n", ed_n, "number of sites")->required();
    ed->add_option("--beta", ed_beta, "inverse temperature (units 1/J)")->required();
    ed->add_option("--q", ed_q, "wavenumber: pi, pi/2, or a float (default pi)");
    ed->add_option("--anisotropy", ed_aniso, "Sz-Sz anisotropy (1 = isotropic)");
    ed->add_option("--boundary", ed_boundary, "periodic | open");
    ed->add_option("--eta", ed_eta, "Gaussian broadening eta (sigma = sqrt(2 eta))");
    auto* gmin = ed->add_option("--grid-min", ed_gmin_v, "grid lower edge (default: auto)");
    auto* gmax = ed->add_option("--grid-max", ed_gmax_v, "grid upper edge (default: auto)");
    ed->add_option("--grid-step", ed_step, "grid step");
    ed->add_option("--out", ed_out, "output prefix");

    // cft
    auto* cft = app.add_subcommand("cft", "closed-form low-energy theory curves");
    double cft_d = 0.075, cft_t0 = 4.5, cft_tmin = 0.005, cft_tmax = 0.2;
    double cft_omin = 1e-8, cft_omax = 50.0;
    int cft_tpoints = 40;
    std::vector<double> cft_temps;
    std::string cft_out = "cft.csv";
    cft->add_option("--d", cft_d, "amplitude D");
    cft->add_option("--t0", cft_t0, "scale T0");
    cft->add_option("--temp", cft_temps, "explicit temperature(s)");
    cft->add_option("--tmin", cft_tmin, "log-grid lower temperature");
    cft->add_option("--tmax", cft_tmax, "log-grid upper temperature");
    cft->add_option("--tpoints", cft_tpoints, "log-grid point count");
    cft->add_option("--omega-min-rel", cft_omin, "epsilon integral lower cutoff (times T)");
    cft->add_option("--omega-max-rel", cft_omax, "epsilon integral upper cutoff (times T)");
    cft->add_option("--out", cft_out, "output CSV");

    // qfi
    auto* qfi = app.add_subcommand("qfi", "QFI report from a spectral CSV");
    std::string qfi_in, qfi_out = "report.json";
    double qfi_window = 0.0;
    qfi->add_option("--in", qfi_in, "input spectral CSV")->required();
    qfi->add_option("--elastic-window", qfi_window, "zero |omega| < window before integrating");
    qfi->add_option("--out", qfi_out, "output JSON");

    // fit
    auto* fit = app.add_subcommand("fit", "power-log scaling fit and extrapolation");
    std::string fit_in, fit_out = "fit.json";
    double fit_beta_min = 4.0;
    bool fit_excl_lowest = false, fit_weighted = false;
    std::vector<std::size_t> fit_exclude;
    std::vector<double> fit_targets;
    fit->add_option("--in", fit_in, "input CSV: beta,f_q[,sigma]")->required();
    fit->add_option("--beta-min", fit_beta_min, "fit only beta >= beta-min");
    fit->add_flag("--exclude-lowest", fit_excl_lowest, "drop the lowest-temperature point");
    fit->add_option("--exclude", fit_exclude, "drop explicit point indices (0-based)");
    fit->add_flag("--weighted", fit_weighted, "inverse-variance weights from the sigma column");
    fit->add_option("--target", fit_targets, "temperature(s) to extrapolate to");
    fit->add_option("--out", fit_out, "output JSON");

    // ingest
    auto* ing = app.add_subcommand("ingest", "G(x,t) table -> spectral grids");
    std::string ing_in, ing_prefix = "ingest";
    std::vector<std::string> ing_q;
    double ing_eta = 0.01, ing_gmin = -5.0, ing_gmax = 5.0, ing_step = 0.005;
    bool ing_norm = false;
    ing->add_option("--in", ing_in, "correlation CSV")->required();
    ing->add_option("--q", ing_q, "wavenumber tokens (default: all lattice momenta)");
    ing->add_option("--eta", ing_eta, "time-domain damping e^{-eta t^2}");
    ing->add_flag("--normalize", ing_norm, "rescale the set to the 1/4 moment sum rule");
    ing->add_option("--grid-min", ing_gmin, "grid lower edge");
    ing->add_option("--grid-max", ing_gmax, "grid upper edge");
    ing->add_option("--grid-step", ing_step, "grid step");
    ing->add_option("--out-prefix", ing_prefix, "output prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (jflag->count() > 0) g.j_mev = j_mev_val;

    try {
        if (ed->parsed())
            return cmd_ed(ed_n, ed_beta, ed_q, ed_aniso, ed_boundary, ed_eta,
                          gmin->count() ? std::optional<double>(ed_gmin_v) : std::nullopt,
                          gmax->count() ? std::optional<double>(ed_gmax_v) : std::nullopt,
                          ed_step, ed_out, g);
        if (cft->parsed())
            return cmd_cft(cft_d, cft_t0, cft_temps, cft_tmin, cft_tmax, cft_tpoints,
                           cft_omin, cft_omax, cft_out, g);
        if (qfi->parsed()) return cmd_qfi(qfi_in, qfi_window, qfi_out, g);
        if (fit->parsed())
            return cmd_fit(fit_in, fit_beta_min, fit_excl_lowest, fit_exclude, fit_weighted,
                           fit_targets, fit_out, g);
        if (ing->parsed())
            return cmd_ingest(ing_in, ing_q, ing_eta, ing_norm, ing_gmin, ing_gmax, ing_step,
                              ing_prefix, g);
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
