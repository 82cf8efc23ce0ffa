#pragma once

#include "jpakit/circuit.hpp"

#include <span>
#include <string>
#include <vector>

namespace jpakit::kerr {

// L_J = phi0 / (2 pi I_c)
double josephson_inductance(double i_c_a);

// Steady-state intracavity photon number of a linear one-port cavity driven
// with power p_in at f_s, detuned by delta = 2 pi (f_s - f_r) from resonance.
// All rates angular (s^-1):
//   n = (1/(h f_s)) * 4 kappa_ex p_in / ((kappa_ex + kappa_i)^2 + 4 delta^2)
double photon_number(double p_in_w, double f_s_hz, double kappa_ex, double kappa_i,
                     double delta);

struct PowerSweepPoint {
    double p_in_w = 0.0;        // power at the device input
    double f_signal_hz = 0.0;   // probe frequency used for that point
    double f_r_hz = 0.0;        // dressed resonance measured at that power
};

struct KerrEstimate {
    double k = 0.0;              // self-Kerr per photon, angular s^-1
    double sigma_k = 0.0;
    double k_per_power = 0.0;    // raw observable d f_r / d p_in, Hz/W
    double sigma_k_per_power = 0.0;
    std::size_t points_used = 0;
    std::vector<std::string> warnings;
};

// Kerr coefficient from a resonance-versus-power sweep. Powers are converted
// to photon numbers with the supplied cavity rates, the shift is fit linearly
// against n over the low-power subset (shift within a quarter linewidth of
// the zero-power resonance), and the slope is doubled: sweeping drive power
// moves the resonance seen by that same drive at half the per-photon rate.
KerrEstimate kerr_from_sweep(std::span<const PowerSweepPoint> points,
                             double kappa_i, double kappa_ex);

// Self-Kerr of the operating point:
//   hbar K = -(e^2 / (2 c_eff)) * (l_eff / l_j) * delta_u_bar^4
// Negative for any physical junction (softening nonlinearity).
double kerr_predict(const circuit::JunctionState& s);

// Design-stage estimate from a junction critical current.
double kerr_design(double i_c_a, const circuit::CircuitModel& m);

} // namespace jpakit::kerr
