#pragma once

#include "jpakit/types.hpp"

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace jpakit::resonance {

// Ideal one-port reflection at angular detuning delta from resonance:
//   gamma(delta) = 1 - kappa_ex / (kappa_tot/2 + i delta)
// Passive for kappa_i, kappa_ex >= 0, so |gamma| <= 1 everywhere.
std::complex<double> reflection_model(double delta, double kappa_i, double kappa_ex);

// Instrument background multiplying the ideal response: amplitude, global
// phase, and cable delay referenced to f_ref (the trace center).
struct Background {
    double amplitude = 1.0;
    double phase_rad = 0.0;
    double delay_s = 0.0;
    std::complex<double> at(double f_hz, double f_ref_hz) const;
};

struct ResonatorFit {
    double f_r_hz = 0.0;
    double kappa_i = 0.0;        // angular s^-1
    double kappa_ex = 0.0;       // angular s^-1
    double sigma_f_r_hz = 0.0;
    double sigma_kappa_i = 0.0;
    double sigma_kappa_ex = 0.0;
    Background background;
    double f_ref_hz = 0.0;       // background phase reference
    double residual_norm = 0.0;
    std::size_t iterations = 0;
    std::vector<std::string> warnings;

    double kappa_tot() const { return kappa_i + kappa_ex; }
    double coupling_efficiency() const { return kappa_ex / (kappa_i + kappa_ex); }
};

// Full complex fit of a one-port reflection trace: 6 parameters
// (f_r, kappa_i, kappa_ex, background amplitude/phase/delay), residuals
// stacked as re/im pairs. Rates are kept nonnegative by optimizing their
// square roots. Throws FitRejectedError when no dip rises above the noise
// floor or the fitted resonance leaves the measured span, ConvergenceError
// when the optimizer stalls.
ResonatorFit fit_one_port(const ComplexReflectionTrace& trace);

struct PhaseExtraction {
    double f_r_hz = 0.0;
    bool resolution_warning = false;   // fewer than 5 points across the feature
};

// Fast resonance locator: steepest phase roll after removing the edge-slope
// cable delay. Insensitive to overall phase offset. Several disjoint
// steep-phase regions raise AmbiguityError carrying all candidates.
PhaseExtraction resonance_from_phase(const ComplexReflectionTrace& trace);

struct LorentzianGainFit {
    double f_c_hz = 0.0;
    double fwhm_hz = 0.0;
    double peak_db = 0.0;       // peak height above the fitted floor
    double floor_w = 0.0;       // fitted floor, linear power
    double amp_w = 0.0;         // fitted peak amplitude above floor, linear power
    double sigma_f_c_hz = 0.0;
    double sigma_fwhm_hz = 0.0;
    double residual_norm = 0.0;
};

// Lorentzian-plus-floor fit of a gain or noise-rise spectrum, done in linear
// power units. masked_bins (e.g. pilot tones) are excluded from the fit.
// Peak-to-floor contrast below 3 dB raises LowContrastError.
LorentzianGainFit fit_lorentzian_gain(const SpectrumTrace& spec,
                                      std::span<const std::size_t> masked_bins = {});

} // namespace jpakit::resonance
