#include "jpakit/chain.hpp"
#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"
#include "jpakit/nlls.hpp"
#include "jpakit/paramp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace jpakit::chain {

using namespace constants;

double callen_welton_temperature_k(double t_k, double f_hz) {
    if (!(f_hz > 0.0))
        throw ValidationError("callen_welton_temperature_k requires a positive frequency");
    if (t_k < 0.0)
        throw ValidationError("callen_welton_temperature_k requires t >= 0");
    const double quantum = 0.5 * h * f_hz / k_b;
    if (t_k == 0.0) return quantum;
    return quantum / std::tanh(quantum / t_k);
}

namespace {

void check_chain(const NoiseChain& c) {
    if (!(c.eta_c_off > 0.0) || c.eta_c_off > 1.0)
        throw ValidationError("eta_c_off must lie in (0, 1]");
    if (!(c.eta_s > 0.0) || c.eta_s > 1.0)
        throw ValidationError("eta_s must lie in (0, 1]");
}

} // namespace

double eta_off(const NoiseChain& c) {
    check_chain(c);
    return c.eta_c_off * c.eta_s;
}

double eta_on(const NoiseChain& c) {
    check_chain(c);
    return std::pow(10.0, c.gain_db / 10.0) * c.eta_s;
}

double gain_from_pilot(double p_on_w, double p_off_w, double eta_c_off) {
    if (!(p_on_w > 0.0) || !(p_off_w > 0.0))
        throw ValidationError("gain_from_pilot requires positive pilot powers");
    if (!(eta_c_off > 0.0) || eta_c_off > 1.0)
        throw ValidationError("eta_c_off must lie in (0, 1]");
    return eta_c_off * p_on_w / p_off_w;
}

HemtCalibration fit_hemt_calibration(std::span<const HemtPoint> points, double f_hz) {
    if (points.size() < 3)
        throw ValidationError("fit_hemt_calibration requires at least 3 set points");
    std::vector<double> x, y;
    x.reserve(points.size());
    y.reserve(points.size());
    for (const auto& p : points) {
        if (!(p.t_set_k >= 0.0) || !std::isfinite(p.psd_k))
            throw ValidationError("fit_hemt_calibration: malformed calibration point");
        x.push_back(callen_welton_temperature_k(p.t_set_k, f_hz));
        y.push_back(p.psd_k);
    }
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*hi - *lo < 1e-9 * std::max(1.0, std::abs(*hi)))
        throw UnidentifiableError(
            "all set points produce the same source level (saturated at the "
            "quantum floor); the added noise cannot be separated from the scale");

    const auto line = fit_line(x, y);
    HemtCalibration out;
    out.scale = line.slope;
    out.sigma_scale = line.sigma_slope;
    out.t_hemt_k = line.intercept;
    out.sigma_t_hemt_k = line.sigma_intercept;
    out.rss = line.rss;
    return out;
}

ReferredNoise refer_to_input(double s_measured_k, double eta, double t_hemt_k, double f_hz) {
    if (!(eta > 0.0))
        throw ValidationError("refer_to_input requires eta > 0");
    if (!(s_measured_k >= 0.0))
        throw ValidationError("refer_to_input requires a nonnegative measured PSD");
    if (t_hemt_k < 0.0)
        throw ValidationError("refer_to_input requires t_hemt >= 0");
    const double v_k = paramp::vacuum_level(f_hz).equivalent_temperature_k();
    ReferredNoise out;
    out.total_k = s_measured_k / eta;
    out.input_k = (s_measured_k - (1.0 - eta) * v_k - t_hemt_k) / eta;
    return out;
}

double noise_floor_dbm(double t_noise_k, double rbw_hz) {
    if (!(t_noise_k > 0.0) || !(rbw_hz > 0.0))
        throw ValidationError("noise_floor_dbm requires positive temperature and bandwidth");
    return 10.0 * std::log10(k_b * t_noise_k * rbw_hz / 1e-3);
}

double estimate_attenuation_db(double source_power_dbm, double floor_margin_db,
                               double t_noise_k, double rbw_hz, double cavity_loss_db) {
    if (cavity_loss_db > 0.0)
        throw ValidationError("cavity_loss_db is a loss and must be <= 0");
    const double floor = noise_floor_dbm(t_noise_k, rbw_hz);
    const double at_device_dbm = floor + floor_margin_db - cavity_loss_db;
    return at_device_dbm - source_power_dbm;
}

InsertionLossStats insertion_loss_diff(const TransmissionTrace& device,
                                       const TransmissionTrace& baseline,
                                       double f_lo_hz, double f_hi_hz) {
    device.validate();
    baseline.validate();
    if (!(f_lo_hz < f_hi_hz))
        throw ValidationError("insertion_loss_diff requires f_lo < f_hi");

    auto interp = [&](double f) {
        const auto& fx = baseline.f_hz;
        auto it = std::lower_bound(fx.begin(), fx.end(), f);
        if (it == fx.begin() || it == fx.end())
            return std::numeric_limits<double>::quiet_NaN();
        const std::size_t j = static_cast<std::size_t>(it - fx.begin());
        const double t = (f - fx[j - 1]) / (fx[j] - fx[j - 1]);
        return baseline.s21_db[j - 1] + t * (baseline.s21_db[j] - baseline.s21_db[j - 1]);
    };

    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < device.f_hz.size(); ++i) {
        const double f = device.f_hz[i];
        if (f < f_lo_hz || f > f_hi_hz) continue;
        const double b = interp(f);
        if (std::isnan(b)) continue;
        const double d = b - device.s21_db[i];
        sum += d;
        sum2 += d * d;
        ++n;
    }
    if (n < 2)
        throw ValidationError("insertion_loss_diff: fewer than 2 overlapping points in band");

    InsertionLossStats out;
    out.n = n;
    out.mean_db = sum / static_cast<double>(n);
    const double var = (sum2 - sum * sum / static_cast<double>(n)) / static_cast<double>(n - 1);
    out.std_db = var > 0.0 ? std::sqrt(var) : 0.0;
    return out;
}

double pilot_snr_db(const SpectrumTrace& spec, double pilot_f_hz) {
    spec.validate();
    const std::size_t n = spec.size();
    const std::size_t ip = spec.bin_of(pilot_f_hz);
    if (std::abs(spec.f_hz[ip] - pilot_f_hz) > spec.rbw_hz)
        throw ValidationError("pilot tone lies outside the spectrum span");

    std::vector<bool> excluded(n, false);
    auto exclude_near = [&](double f) {
        const std::size_t b = spec.bin_of(f);
        for (std::size_t i = (b >= 2 ? b - 2 : 0); i <= std::min(b + 2, n - 1); ++i)
            excluded[i] = true;
    };
    exclude_near(pilot_f_hz);

    auto pump_it = spec.meta.find("pump_f_Hz");
    auto on_it = spec.meta.find("pump_on");
    const bool pump_on = on_it != spec.meta.end() && on_it->second != 0.0;
    if (pump_on && pump_it != spec.meta.end()) {
        const double f_pump = pump_it->second;
        const std::size_t bp = spec.bin_of(f_pump);
        if (std::max(bp, ip) - std::min(bp, ip) <= 1)
            throw LowContrastError("pump leakage overlaps the pilot bin");
        exclude_near(f_pump);
        exclude_near(2.0 * f_pump - pilot_f_hz);   // idler image of the pilot
    }

    const std::size_t win = 60;
    const std::size_t a = ip >= win ? ip - win : 0;
    const std::size_t b = std::min(ip + win, n - 1);
    std::vector<double> floor_bins;
    for (std::size_t i = a; i <= b; ++i)
        if (!excluded[i]) floor_bins.push_back(spec.psd_dbm[i]);
    if (floor_bins.size() < 5)
        throw ValidationError("too few bins around the pilot to estimate a floor");

    const std::size_t k = floor_bins.size() / 2;
    std::nth_element(floor_bins.begin(), floor_bins.begin() + k, floor_bins.end());
    const double floor_db = floor_bins[k];

    const double snr = spec.psd_dbm[ip] - floor_db;
    if (snr < 3.0)
        throw LowContrastError("pilot tone rises less than 3 dB above the floor");
    return snr;
}

double delta_snr_db(const SpectrumTrace& pump_on, const SpectrumTrace& pump_off,
                    double pilot_f_hz) {
    return pilot_snr_db(pump_on, pilot_f_hz) - pilot_snr_db(pump_off, pilot_f_hz);
}

} // namespace jpakit::chain
