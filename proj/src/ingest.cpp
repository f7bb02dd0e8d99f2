#include "qfiw/ingest.hpp"
#include "qfiw/errors.hpp"
#include "qfiw/kernels.hpp"
#include "qfiw/threads.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace qfiw {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw validation_error("malformed " + what + ": '" + s + "'");
    }
}

std::map<std::string, std::string> parse_header(const std::string& line,
                                                const std::string& what) {
    if (line.empty() || line[0] != '#')
        throw validation_error("malformed header in " + what + ": expected '# key=value ...'");
    std::map<std::string, std::string> kv;
    std::istringstream ss(line.substr(1));
    std::string tok;
    while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw validation_error("malformed header token '" + tok + "' in " + what);
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

std::string header_field(const std::map<std::string, std::string>& kv, const std::string& key,
                         const std::string& what) {
    const auto it = kv.find(key);
    if (it == kv.end())
        throw validation_error("missing header field '" + key + "' in " + what);
    return it->second;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

void CorrelationTable::validate() const {
    if (n_sites < 1) throw validation_error("correlation table: n_sites must be >= 1");
    if (center < 0 || center >= n_sites)
        throw validation_error("correlation table: center site out of range");
    if (!(dt > 0.0)) throw validation_error("correlation table: dt must be > 0");
    if (re.rows() != n_sites || im.rows() != n_sites || re.cols() != im.cols() ||
        re.cols() < 1)
        throw validation_error("correlation table: inconsistent matrix shape");
    if (std::abs(im(center, 0)) > 1e-12 * std::max(1.0, std::abs(re(center, 0))))
        throw validation_error("correlation table: G(c, 0) must be real, got imag = " +
                               std::to_string(im(center, 0)));
}

CorrelationTable load_correlations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open correlation file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw validation_error("empty correlation file: " + path);
    const auto kv = parse_header(line, path);

    CorrelationTable tab;
    tab.n_sites = static_cast<int>(parse_double(header_field(kv, "n_sites", path), "n_sites"));
    tab.center = static_cast<int>(parse_double(header_field(kv, "center", path), "center"));
    tab.dt = parse_double(header_field(kv, "dt", path), "dt");
    tab.t_max = parse_double(header_field(kv, "tmax", path), "tmax");
    tab.beta = parse_double(header_field(kv, "beta", path), "beta");
    if (tab.n_sites < 1 || tab.n_sites > 4096)
        throw validation_error("correlation table: bad n_sites in header");
    if (!(tab.dt > 0.0) || tab.t_max < 0.0)
        throw validation_error("correlation table: bad dt/tmax in header");

    const auto n_times = static_cast<std::size_t>(std::floor(tab.t_max / tab.dt + 0.5)) + 1;
    tab.re.setZero(tab.n_sites, static_cast<Eigen::Index>(n_times));
    tab.im.setZero(tab.n_sites, static_cast<Eigen::Index>(n_times));
    std::vector<std::vector<bool>> seen(static_cast<std::size_t>(tab.n_sites),
                                        std::vector<bool>(n_times, false));

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto cols = split_csv(line);
        if (cols.size() == 4 && cols[0] == "x" && cols[1] == "t") continue;  // column header
        if (cols.size() != 4)
            throw validation_error(path + ":" + std::to_string(lineno) +
                                   ": expected x,t,re,im");
        const int x = static_cast<int>(parse_double(cols[0], "x"));
        const double t = parse_double(cols[1], "t");
        const double re = parse_double(cols[2], "re");
        const double im = parse_double(cols[3], "im");
        if (std::isnan(re) || std::isnan(im))
            throw validation_error(path + ":" + std::to_string(lineno) + ": NaN value");
        if (x < 0 || x >= tab.n_sites)
            throw validation_error(path + ":" + std::to_string(lineno) + ": site " +
                                   std::to_string(x) + " out of range");
        const double kf = t / tab.dt;
        const auto k = static_cast<std::size_t>(std::floor(kf + 0.5));
        if (k >= n_times || std::abs(kf - static_cast<double>(k)) > 1e-6)
            throw validation_error(path + ":" + std::to_string(lineno) + ": time " +
                                   std::to_string(t) + " is not on the dt grid");
        tab.re(x, static_cast<Eigen::Index>(k)) = re;
        tab.im(x, static_cast<Eigen::Index>(k)) = im;
        seen[static_cast<std::size_t>(x)][k] = true;
    }

    std::ostringstream missing;
    int n_missing = 0;
    for (int x = 0; x < tab.n_sites; ++x) {
        for (std::size_t k = 0; k < n_times; ++k) {
            if (!seen[static_cast<std::size_t>(x)][k]) {
                if (++n_missing <= 12)
                    missing << (n_missing > 1 ? ", " : "") << "(" << x << ", "
                            << static_cast<double>(k) * tab.dt << ")";
            }
        }
    }
    if (n_missing > 0)
        throw validation_error(path + ": non-rectangular grid, " + std::to_string(n_missing) +
                               " missing (x, t) cells: " + missing.str() +
                               (n_missing > 12 ? ", ..." : ""));
    tab.validate();
    return tab;
}

void save_correlations(const CorrelationTable& tab, const std::string& path) {
    tab.validate();
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write correlation file: " + path);
    out << "# n_sites=" << tab.n_sites << " center=" << tab.center << " dt=" << fmt17(tab.dt)
        << " tmax=" << fmt17(tab.t_max) << " beta=" << fmt17(tab.beta) << "\n";
    for (int x = 0; x < tab.n_sites; ++x)
        for (std::size_t k = 0; k < tab.n_times(); ++k)
            out << x << "," << fmt17(tab.time(k)) << ","
                << fmt17(tab.re(x, static_cast<Eigen::Index>(k))) << ","
                << fmt17(tab.im(x, static_cast<Eigen::Index>(k))) << "\n";
}

SpectralGrid load_spectral_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open spectral file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw validation_error("empty spectral file: " + path);
    const auto kv = parse_header(line, path);

    SpectralGrid grid;
    grid.q = parse_double(header_field(kv, "q", path), "q");
    grid.beta = parse_double(header_field(kv, "beta", path), "beta");
    grid.broadening_eta = parse_double(header_field(kv, "eta", path), "eta");
    const std::string norm = header_field(kv, "norm", path);
    if (norm == "absolute") {
        grid.normalization = SpectralGrid::Norm::absolute;
    } else if (norm == "per_2pi") {
        grid.normalization = SpectralGrid::Norm::per_2pi;
    } else {
        throw validation_error(path + ": norm must be absolute or per_2pi, got '" + norm + "'");
    }

    std::vector<double> omegas;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto cols = split_csv(line);
        if (cols.size() == 2 && cols[0] == "omega") continue;
        if (cols.size() != 2)
            throw validation_error(path + ":" + std::to_string(lineno) +
                                   ": expected omega,value");
        const double om = parse_double(cols[0], "omega");
        const double v = parse_double(cols[1], "value");
        if (std::isnan(om) || std::isnan(v))
            throw validation_error(path + ":" + std::to_string(lineno) + ": NaN value");
        if (v < 0.0)
            throw validation_error(path + ":" + std::to_string(lineno) +
                                   ": negative spectral value " + std::to_string(v));
        omegas.push_back(om);
        grid.values.push_back(v);
    }
    if (grid.values.size() < 2)
        throw validation_error(path + ": need at least two grid rows");
    grid.omega_min = omegas.front();
    grid.step = (omegas.back() - omegas.front()) / static_cast<double>(omegas.size() - 1);
    if (!(grid.step > 0.0)) throw validation_error(path + ": grid must ascend");
    const double scale = std::max(std::abs(omegas.front()), std::abs(omegas.back()));
    for (std::size_t i = 0; i < omegas.size(); ++i)
        if (std::abs(omegas[i] - grid.omega(i)) > 1e-12 * std::max(scale, 1.0))
            throw validation_error(path + ": omega grid is not uniform at row " +
                                   std::to_string(i));
    grid.declared_total = grid.trapezoid_total();
    return grid;
}

void save_spectral_csv(const SpectralGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write spectral file: " + path);
    out << "# q=" << fmt17(grid.q) << " beta=" << fmt17(grid.beta)
        << " eta=" << fmt17(grid.broadening_eta) << " norm="
        << (grid.normalization == SpectralGrid::Norm::absolute ? "absolute" : "per_2pi")
        << "\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        out << fmt17(grid.omega(i)) << "," << fmt17(grid.values[i]) << "\n";
}

SpectralGrid to_absolute(const SpectralGrid& grid) {
    if (grid.normalization == SpectralGrid::Norm::absolute) return grid;
    SpectralGrid out = grid;
    out.normalization = SpectralGrid::Norm::absolute;
    kern::active().scale(1.0 / (2.0 * std::numbers::pi), out.values.data(), out.values.size());
    out.declared_total = out.trapezoid_total();
    return out;
}

namespace {

SpectralGrid transform_once(const CorrelationTable& tab, double q, double eta,
                            const GridSpec& gspec) {
    const std::size_t nt = tab.n_times();
    const std::size_t npts = gspec.points();

    // Collapse over x first, then damp and fold the trapezoid weights into
    // the time series so each omega is one oscillator reduction.
    std::vector<double> wr(nt, 0.0), wi(nt, 0.0);
    for (int x = 0; x < tab.n_sites; ++x) {
        const double cx = std::cos(q * (x - tab.center));
        for (std::size_t k = 0; k < nt; ++k) {
            wr[k] += cx * tab.re(x, static_cast<Eigen::Index>(k));
            wi[k] += cx * tab.im(x, static_cast<Eigen::Index>(k));
        }
    }
    for (std::size_t k = 0; k < nt; ++k) {
        const double t = tab.time(k);
        double w = std::exp(-eta * t * t) * tab.dt / std::numbers::pi;
        if (k == 0 || k + 1 == nt) w *= 0.5;
        wr[k] *= w;
        wi[k] *= w;
    }

    SpectralGrid grid;
    grid.q = q;
    grid.beta = tab.beta;
    grid.omega_min = gspec.omega_min;
    grid.step = gspec.step;
    grid.broadening_eta = eta;
    grid.values.assign(npts, 0.0);
    parallel_for_index(npts, [&](std::size_t i) {
        grid.values[i] =
            kern::active().cos_sin_reduce(wr.data(), wi.data(), nt, grid.omega(i), tab.dt);
    });
    return grid;
}

} // namespace

TransformResult transform_to_dsf(const CorrelationTable& tab, double q, double eta,
                                 const GridSpec& gspec) {
    tab.validate();
    if (!(eta > 0.0)) throw validation_error("transform eta must be > 0");
    OperatorSpec::from_wavenumber(tab.n_sites, q);  // commensurability check

    TransformResult res;
    res.achieved_eta = eta;
    for (int attempt = 0;; ++attempt) {
        res.grid = transform_once(tab, q, res.achieved_eta, gspec);
        double pos_mass = 0.0, neg_mass = 0.0, most_negative = 0.0;
        for (double v : res.grid.values) {
            if (v >= 0.0) {
                pos_mass += v;
            } else {
                neg_mass -= v;
                most_negative = std::min(most_negative, v);
            }
        }
        pos_mass *= res.grid.step;
        neg_mass *= res.grid.step;
        res.max_negativity = most_negative;
        res.clipped_mass = neg_mass;
        const double total = pos_mass + neg_mass;
        if (neg_mass <= 1e-6 * std::max(total, 1e-300) || attempt >= 4) {
            res.escalations = attempt;
            break;
        }
        res.achieved_eta *= 2.0;
    }
    for (double& v : res.grid.values) v = std::max(v, 0.0);
    res.grid.declared_total = res.grid.trapezoid_total();
    return res;
}

NormalizeResult normalize_moment(std::vector<SpectralGrid>& grids, int n_sites) {
    const SumRuleReport rep = sum_rule_check(std::span<const SpectralGrid>(grids), n_sites);
    if (!(rep.moment > 0.0))
        throw validation_error("normalize_moment: zero total spectral weight");
    NormalizeResult out;
    out.moment_before = rep.moment;
    out.scale = 0.25 / rep.moment;
    for (auto& g : grids) {
        kern::active().scale(out.scale, g.values.data(), g.values.size());
        g.declared_total = g.trapezoid_total();
    }
    out.moment_after =
        sum_rule_check(std::span<const SpectralGrid>(grids), n_sites).moment;
    return out;
}

RemoveElasticResult remove_elastic(const SpectralGrid& grid, double window) {
    if (window < 0.0) throw validation_error("elastic window must be >= 0");
    RemoveElasticResult out;
    out.grid = grid;
    const double before = grid.trapezoid_total();
    for (std::size_t i = 0; i < out.grid.size(); ++i)
        if (std::abs(out.grid.omega(i)) < window) out.grid.values[i] = 0.0;
    out.grid.declared_total = out.grid.trapezoid_total();
    out.removed_mass = before - out.grid.declared_total;
    return out;
}

} // namespace qfiw
