#pragma once

#include "jpakit/types.hpp"

#include <span>

namespace jpakit::chain {

// Callen-Welton equivalent noise temperature of a matched load at physical
// temperature t:  (h f / 2 k_b) coth(h f / 2 k_b t). Quantum-limited
// (h f / 2 k_b) as t -> 0, classical (t) as t -> inf.
double callen_welton_temperature_k(double t_k, double f_hz);

// Transmission/gain bookkeeping between the device reference plane and the
// HEMT input.
struct NoiseChain {
    double eta_c_off = 1.0;   // pump-off path transmission through the cold circulators
    double eta_s = 1.0;       // sample-holder-to-HEMT transmission
    double gain_db = 0.0;     // device power gain when pumped
    double t_hemt_k = 0.0;    // HEMT noise temperature referred to its input
};

double eta_off(const NoiseChain& c);   // eta_c_off * eta_s
double eta_on(const NoiseChain& c);    // 10^(gain_db/10) * eta_s

// Device power gain from a pilot tone measured at the spectrum analyzer with
// the pump on and off: g = eta_c_off * p_on / p_off.
double gain_from_pilot(double p_on_w, double p_off_w, double eta_c_off);

struct HemtPoint {
    double t_set_k = 0.0;   // calibrated source temperature
    double psd_k = 0.0;     // measured PSD referred to the HEMT input, kelvin
};

struct HemtCalibration {
    double t_hemt_k = 0.0;       // intercept: HEMT-plus-backend added noise
    double sigma_t_hemt_k = 0.0;
    double scale = 0.0;          // slope against the Callen-Welton abscissa
    double sigma_scale = 0.0;
    double rss = 0.0;
};

// Linear regression psd = scale * t_cw(t_set) + t_hemt. Raises
// UnidentifiableError when the Callen-Welton abscissa has no spread (all
// set points saturated at the quantum level).
HemtCalibration fit_hemt_calibration(std::span<const HemtPoint> points, double f_hz);

struct ReferredNoise {
    double total_k = 0.0;   // everything at the device reference plane: s_meas / eta
    double input_k = 0.0;   // the input term alone: (s_meas - (1-eta) v - t_hemt) / eta
};

// Refer a PSD measured at the HEMT input (kelvin) back to the device plane
// through net transmission eta (may exceed 1 when it includes device gain).
ReferredNoise refer_to_input(double s_measured_k, double eta, double t_hemt_k, double f_hz);

// Johnson noise floor of a t_noise_k load in one resolution bandwidth bin.
double noise_floor_dbm(double t_noise_k, double rbw_hz);

// Input-line attenuation from a tone of known source power seen
// floor_margin_db above a noise floor of temperature t_noise_k, after
// undoing the (negative) cavity reflection loss.
double estimate_attenuation_db(double source_power_dbm, double floor_margin_db,
                               double t_noise_k, double rbw_hz, double cavity_loss_db);

struct InsertionLossStats {
    double mean_db = 0.0;
    double std_db = 0.0;
    std::size_t n = 0;
};

// Pointwise baseline - device difference over [f_lo, f_hi]; the baseline is
// interpolated onto the device grid. Positive mean = the device path loses.
InsertionLossStats insertion_loss_diff(const TransmissionTrace& device,
                                       const TransmissionTrace& baseline,
                                       double f_lo_hz, double f_hi_hz);

// Pilot-tone SNR in one spectrum: pilot-bin PSD over the median floor near
// the pilot, excluding the pilot, pump and idler bins. Raises
// LowContrastError when the pump bin overlaps the pilot or the tone clears
// the floor by less than 3 dB.
double pilot_snr_db(const SpectrumTrace& spec, double pilot_f_hz);

// SNR improvement of the pilot between pump-on and pump-off spectra.
double delta_snr_db(const SpectrumTrace& pump_on, const SpectrumTrace& pump_off,
                    double pilot_f_hz);

} // namespace jpakit::chain
