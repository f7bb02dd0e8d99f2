#pragma once

#include "qfiw/spectrum.hpp"

#include <functional>

namespace qfiw {

enum class QfiRoute { direct, spectral, cft };
enum class DepthMode { qfi, static_bound };

// f_Q, its decomposition 4S(q) - epsilon(beta), and the witnessed depths.
// On exact Lehmann data f_q = s_q_times4 - epsilon to 1e-9 and both depth
// bounds are one-way ("at least k"); no upper bounds are implied.
struct QfiReport {
    double f_q = 0.0;
    double s_q_times4 = 0.0;
    double epsilon = 0.0;
    int depth_qfi = 1;
    int depth_static = 1;
    double beta = 0.0;
    QfiRoute route = QfiRoute::direct;
    bool elastic_excluded = false;
    bool divisor_warning_qfi = false;
    bool divisor_warning_static = false;
    int n_sites = 0;
    double q = 0.0;
};

const char* to_string(QfiRoute route);

// F_Q/N by the eigenbasis double sum 2 sum_{i != j} (p_i-p_j)^2/(p_i+p_j)
// |<i|O|j>|^2; i = j excluded, pairs with p_i + p_j < 1e-300 skipped.
double qfi_direct(const EigenSystem& es, const ThermalEnsemble& ens,
                  const std::vector<SectorOperator>& ops);

// f_Q = 4 int_0^inf tanh(beta w/2)(1 - e^{-beta w}) S(w) dw over the positive
// poles; elastic lines contribute nothing (tanh(0) = 0). Saturated stable
// forms are used for beta*omega > 700.
double qfi_spectral(const LineSpectrum& ls);

// eps = 16 int_0^inf S(w)/(1 + e^{beta w}) dw; the elastic delta sits on the
// integration boundary and counts half, i.e. 4 * (elastic weight). This makes
// 4S - eps = f_Q an identity on detailed-balanced line data.
double epsilon_correction(const LineSpectrum& ls);

// Grid route: the same three integrals evaluated by trapezoid over the
// omega >= 0 part of the grid (the negative side is implied by detailed
// balance; using it directly would exponentially amplify broadening tails).
// quad_error is a Richardson estimate from the half-resolution grid.
struct GridQuantities {
    double f_q = 0.0;
    double s_q = 0.0;
    double epsilon = 0.0;
    double quad_error = 0.0;
};

GridQuantities grid_quantities(const SpectralGrid& grid);

// Entanglement depth bounds. qfi mode: f_q > k witnesses (k+1)-partite
// entanglement; static mode: 4S > k witnesses k-partite. Strict inequality;
// the caveat that the bounding k should divide n_sites surfaces as a warning
// (n_sites = 0 means thermodynamic, no check).
struct DepthResult {
    int depth = 1;
    int bounding_k = 0;
    bool divisor_warning = false;
};

DepthResult witnessed_depth(double value, int n_sites, DepthMode mode);

QfiReport report_from_exact(const EigenSystem& es, const ThermalEnsemble& ens,
                            const std::vector<SectorOperator>& ops, const OperatorSpec& op);
// inelastic_witness drops the flagged elastic weight from S(q) as well (the
// Bragg-exclusion mode); default keeps it, which the decomposition identity
// needs. f_q never sees elastic lines either way.
QfiReport report_from_lines(const LineSpectrum& ls, bool inelastic_witness = false);
QfiReport report_from_grid(const SpectralGrid& grid, bool elastic_excluded = false);

// Bisection for the epsilon(T) = 1 crossing. Samples the bracket first; a
// non-monotone profile is reported, not fatal, and the first crossing is
// returned. No crossing returns the upper endpoint with crossed = false.
struct TqResult {
    double t_q = 0.0;
    bool crossed = false;
    bool monotone_warning = false;
    double eps_at_lo = 0.0;
    double eps_at_hi = 0.0;
};

TqResult t_q_solve(const std::function<double(double)>& epsilon_of_t, double t_lo,
                   double t_hi, int samples = 33, double rel_tol = 1e-4);

// Critical-point data for the scaling evaluators. delta_q = 1 - 2 delta_op.
struct CriticalExponents {
    double nu = 1.0;
    double eta_anom = 0.0;
    double z = 1.0;
    double delta_op = 0.5;
    double amplitude_a = 1.0;
    double universal_d = 1.0;

    double delta_q() const { return 1.0 - 2.0 * delta_op; }
};

// T_Q ~ (A D)^{1/((1-eta)nu - 1)} with the epsilon(T) = A D T^{1-(1-eta)nu}
// evaluator. eta_anom = 1 means the scaling form breaks down (hard error),
// as does (1-eta)nu = 1.
struct UniversalTq {
    double t_q = 0.0;
    double exponent = 0.0;
};

UniversalTq t_q_universal(const CriticalExponents& ce);
double epsilon_universal(const CriticalExponents& ce, double t);

// f_Q(T) ~ T^{-delta_q/z}; delta_q = 0 flags the sub-power-law regime where
// the log-scaling fit must be used instead.
struct PowerLawScaling {
    double delta_q = 0.0;
    double scale = 1.0;
    bool sub_power_law = false;
};

PowerLawScaling power_law_qfi_scaling(const CriticalExponents& ce, double t);

} // namespace qfiw
