#pragma once

#include "jpakit/types.hpp"

#include <complex>
#include <functional>
#include <span>

namespace jpakit::paramp {

// Symmetrized noise power spectral density in W/Hz.
struct NoiseDensity {
    double w_per_hz = 0.0;
    double equivalent_temperature_k() const;
    static NoiseDensity from_temperature_k(double t_k);
};

// Half-photon vacuum level h f / 2.
NoiseDensity vacuum_level(double f_hz);

// Amplitude gains of a phase-preserving amplifier at one signal detuning.
// g_s multiplies the signal input, g_i the conjugated idler input.
// kappa_ratio = kappa_i / kappa_ex.
struct GainPair {
    std::complex<double> g_s{1.0, 0.0};
    std::complex<double> g_i{0.0, 0.0};
    double detuning = 0.0;        // angular signal-pump detuning
    double kappa_ratio = 0.0;
};

// Photon-flux conservation for a cavity amplifier with internal loss:
//   (1 + rho) |g_i|^2 = |g_s|^2 - 1 + rho |g_s + 1|^2,  rho = kappa_i/kappa_ex.
// Returns lhs - rhs normalized by max(1, |lhs|, |rhs|).
double sum_rule_residual(const GainPair& g);

// |g_i|^2 implied by g_s through the conservation law.
double idler_gain_from_sum_rule(std::complex<double> g_s, double kappa_ratio);

// Output PSD for input s_in at the signal frequency, vacuum in the loss and
// idler channels:
//   s_out = s_in |g_s|^2 + v rho |g_s + 1|^2 + v (1 + rho) |g_i|^2
NoiseDensity output_psd(const NoiseDensity& s_in, const GainPair& g, double f_hz);

// Input-referred added noise of the amplifier alone (idler gain eliminated
// via the sum rule):
//   s_add = v - v/|g_s|^2 + 2 v rho |g_s + 1|^2 / |g_s|^2
NoiseDensity added_noise(std::complex<double> g_s, double kappa_ratio, double f_hz);

// System noise referred to the device input, in kelvin: vacuum input plus
// amplifier added noise plus the post-device chain (transmission eta_s to a
// HEMT with noise temperature t_hemt_k) divided by the device power gain.
double expected_total_input_noise_k(double gain_db,
                                    double coupling_efficiency,
                                    double eta_s,
                                    double t_hemt_k,
                                    double f_hz);

// First-order uncertainty propagation: quadrature sum of central-difference
// partial derivatives times input sigmas.
UncertainValue propagate_uncertainty(const std::function<double(std::span<const double>)>& f,
                                     std::span<const UncertainValue> inputs);

struct NoiseBandInputs {
    UncertainValue gain_db;
    UncertainValue coupling_efficiency;
    UncertainValue eta_s;
    UncertainValue t_hemt_k;
    double f_hz = 0.0;
    double drift_db = 0.2;   // flat calibration drift, folded into eta_s as 1 sigma
};

// expected_total_input_noise_k with a propagated 1-sigma band.
UncertainValue expected_noise_band(const NoiseBandInputs& in);

} // namespace jpakit::paramp
