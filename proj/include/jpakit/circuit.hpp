#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace jpakit::circuit {

// Half-wave transmission-line resonator with a lumped junction inductance at
// its midpoint. f0 is the resonance with the junction shorted; f_geo sets the
// scale of the line impedance, z0 = 50 * f_geo / f0. The line totals are
//   C_line = 1/(4 f0 z0),  L_line = z0/(4 f0).
struct CircuitModel {
    double f_geo_hz = 7.2e9;
    double f0_hz = 6.2e9;
    double alpha_l = 0.0;     // distributed loss over the line, nepers
    double r_j_ohm = 15e3;    // junction subgap resistance
    double c_k_f = 0.0;       // input coupling capacitance

    double z0_ohm() const { return 50.0 * f_geo_hz / f0_hz; }
    double line_capacitance_f() const { return 1.0 / (4.0 * f0_hz * z0_ohm()); }
    double line_inductance_h() const { return z0_ohm() / (4.0 * f0_hz); }
    void validate() const;
};

// Everything derived from one junction operating point.
struct JunctionState {
    double kl_rad = 0.0;       // electrical length at resonance, in (0, pi/2]
    double l_j_h = 0.0;        // junction inductance
    double delta_u_bar = 0.0;  // normalized mode amplitude drop across the junction, 2 cos(kl)
    double c_eff_f = 0.0;      // effective lumped capacitance
    double l_eff_h = 0.0;      // effective lumped inductance, 1/((2 pi f_r)^2 c_eff)
    double r_eff_ohm = 0.0;    // junction resistance transformed to the mode, r_j/delta_u_bar^2
    double f_r_hz = 0.0;
};

// Electrical length from the dressed resonance: kl = (pi/2) f_r / f0.
// Domain: 0 < f_r <= f0.
double kl_from_fr(double f_r_hz, double f0_hz);

// Root of the transcendental resonance condition 2 cot(kl) = r * kl on
// (0, pi/2], where r = L_J / L_line >= 0. Monotone decreasing in r; r = 0
// gives exactly pi/2. Bisection bracket plus Newton polish, relative
// tolerance 1e-12.
double solve_kl(double inductance_ratio);

double flux_drop(double kl_rad);                                 // 2 cos(kl)
double effective_capacitance(double kl_rad, double c_line_f);    // c_line (1 + sinc(2 kl))
double junction_inductance(double kl_rad, double l_line_h);      // l_line * 2 cot(kl)/kl

JunctionState junction_state_from_fr(double f_r_hz, const CircuitModel& m);
JunctionState junction_state_from_inductance(double l_j_h, const CircuitModel& m);

// Model decay rates (angular s^-1) at a junction operating point.
double kappa_i_model(const JunctionState& s, const CircuitModel& m);
double kappa_ex_model(const JunctionState& s, const CircuitModel& m);

struct RatePoint {
    double f_r_hz = 0.0;
    double kappa = 0.0;   // angular s^-1
    double sigma = 0.0;   // 0 means unweighted
};

struct DissipationFit {
    double alpha_l = 0.0;
    double r_j_ohm = 0.0;
    double sigma_alpha_l = 0.0;
    double sigma_r_j = 0.0;
    double residual_norm = 0.0;
    std::vector<std::string> warnings;
};

struct CouplingFit {
    double c_k_f = 0.0;
    double sigma_c_k = 0.0;
    double residual_norm = 0.0;
    std::vector<std::string> warnings;
};

// Fit (alpha_l, r_j) to internal-loss samples kappa_i(f_r). Geometry (f0,
// f_geo) is taken from `m`; its alpha_l/r_j entries are ignored. When every
// sample sits so close to f0 that the junction term vanishes, r_j is
// unidentifiable: its sigma is reported as +inf with a warning.
DissipationFit fit_dissipation(std::span<const RatePoint> points, const CircuitModel& m);

// Fit the coupling capacitance c_k to external-coupling samples kappa_ex(f_r).
CouplingFit fit_coupling(std::span<const RatePoint> points, const CircuitModel& m);

// Systematic sweep: evaluate a prediction over a grid of f0 values and return
// the per-component min/max envelope. Per-point failures are collected, not
// fatal; components from failed points are excluded from the envelope.
struct BandEnvelope {
    std::vector<double> f0_grid_hz;
    std::vector<std::vector<double>> values;   // values[i] = outputs at f0_grid_hz[i], empty on failure
    std::vector<double> lo, hi;
    struct Failure {
        double f0_hz;
        std::string message;
    };
    std::vector<Failure> failures;
};

BandEnvelope band_evaluate(const std::function<std::vector<double>(double)>& predict,
                           double f0_lo_hz, double f0_hi_hz, std::size_t n_grid);

} // namespace jpakit::circuit
