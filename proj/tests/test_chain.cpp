#include <doctest.h>

#include "jpakit/chain.hpp"
#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"

#include <cmath>
#include <vector>

using namespace jpakit;
using namespace jpakit::chain;
using doctest::Approx;

namespace {

SpectrumTrace flat_spectrum(double f0, double rbw, std::size_t n, double floor_dbm) {
    SpectrumTrace s;
    s.rbw_hz = rbw;
    for (std::size_t i = 0; i < n; ++i) {
        s.f_hz.push_back(f0 + (static_cast<double>(i) + 0.5) * rbw);
        s.psd_dbm.push_back(floor_dbm);
    }
    return s;
}

} // namespace

TEST_CASE("Callen-Welton temperature has the right limits") {
    const double f = 5.9e9;
    const double quantum = constants::h * f / (2.0 * constants::k_b);
    // zero temperature floors at the vacuum level
    CHECK(callen_welton_temperature_k(0.0, f) == Approx(quantum).epsilon(1e-12));
    // classical limit
    CHECK(callen_welton_temperature_k(300.0, f) == Approx(300.0).epsilon(1e-4));
    // a 1.61 K source is barely vacuum-corrected at 5.942 GHz
    const double cw = callen_welton_temperature_k(1.61, 5.942e9);
    CHECK(cw > 1.61);
    CHECK(cw == Approx(1.6142).epsilon(1e-3));
}

TEST_CASE("chain transmissions compose as documented") {
    NoiseChain c;
    c.eta_c_off = 0.87;
    c.eta_s = 0.8;
    c.gain_db = 20.3;
    CHECK(eta_off(c) == Approx(0.696).epsilon(1e-12));
    CHECK(eta_on(c) == Approx(std::pow(10.0, 2.03) * 0.8).epsilon(1e-12));
}

TEST_CASE("pilot-tone gain undoes the off-path circulator loss") {
    // on/off pilot power ratio 117.5 with eta_c_off = 0.87
    const double g = gain_from_pilot(117.5e-15, 1e-15, 0.87);
    CHECK(g == Approx(102.225).epsilon(1e-12));
    CHECK(10.0 * std::log10(g) == Approx(20.0956).epsilon(1e-4));
    CHECK_THROWS_AS(gain_from_pilot(0.0, 1e-15, 0.87), ValidationError);
}

TEST_CASE("HEMT calibration recovers slope and intercept exactly") {
    const double f = 5.9e9, scale = 1.07, t_h = 1.61;
    std::vector<HemtPoint> pts;
    for (double t : {0.02, 0.5, 1.0, 2.0, 4.0, 6.5, 9.0})
        pts.push_back({t, scale * callen_welton_temperature_k(t, f) + t_h});
    const auto cal = fit_hemt_calibration(pts, f);
    CHECK(cal.scale == Approx(scale).epsilon(1e-9));
    CHECK(cal.t_hemt_k == Approx(t_h).epsilon(1e-9));
    CHECK(cal.sigma_t_hemt_k >= 0.0);
}

TEST_CASE("HEMT calibration refuses degenerate sweeps") {
    std::vector<HemtPoint> same = {{1.0, 2.0}, {1.0, 2.1}, {1.0, 2.2}};
    CHECK_THROWS_AS(fit_hemt_calibration(same, 5.9e9), UnidentifiableError);
    std::vector<HemtPoint> few = {{1.0, 2.0}, {2.0, 3.0}};
    CHECK_THROWS_AS(fit_hemt_calibration(few, 5.9e9), ValidationError);
}

TEST_CASE("noise floor arithmetic") {
    // 1.61 K in a 3.88 kHz bandwidth
    CHECK(noise_floor_dbm(1.61, 3880.0) == Approx(-160.643).epsilon(1e-4));
    // 1 K in 1 Hz
    CHECK(noise_floor_dbm(1.0, 1.0) == Approx(-198.5996).epsilon(1e-5));
    CHECK_THROWS_AS(noise_floor_dbm(-1.0, 1.0), ValidationError);
}

TEST_CASE("attenuation estimate composes floor, margin, cavity and source") {
    const double att = estimate_attenuation_db(-43.0, 6.3, 1.61, 3880.0, -0.84);
    CHECK(att == Approx(-110.503).epsilon(1e-4));
    // cavity loss must be a loss
    CHECK_THROWS_AS(estimate_attenuation_db(-43.0, 6.3, 1.61, 3880.0, +0.5), ValidationError);
}

TEST_CASE("input referral undoes the chain budget") {
    const double f = 5.784e9;
    const double v_k = constants::h * f / (2.0 * constants::k_b);
    const double eta = 0.696, t_h = 1.61, t_in = 0.41;
    // forward-compose a measured PSD, then refer it back
    const double s_meas = eta * t_in + (1.0 - eta) * v_k + t_h;
    const auto ref = refer_to_input(s_meas, eta, t_h, f);
    CHECK(ref.input_k == Approx(t_in).epsilon(1e-12));
    CHECK(ref.total_k == Approx(s_meas / eta).epsilon(1e-12));
    CHECK_THROWS_AS(refer_to_input(1.0, 0.0, 1.61, f), ValidationError);
}

TEST_CASE("insertion loss difference interpolates the baseline") {
    TransmissionTrace base, dev;
    for (int i = 0; i <= 100; ++i) {
        base.f_hz.push_back(4e9 + i * 40e6);
        base.s21_db.push_back(-3.0 + 1e-11 * (base.f_hz.back() - 4e9));
    }
    // device grid is offset and finer; path is 0.6 dB lossier
    for (int i = 0; i <= 160; ++i) {
        dev.f_hz.push_back(4.01e9 + i * 24e6);
        dev.s21_db.push_back(-3.6 + 1e-11 * (dev.f_hz.back() - 4e9));
    }
    const auto d = insertion_loss_diff(dev, base, 4.1e9, 7.5e9);
    CHECK(d.mean_db == Approx(0.6).epsilon(1e-9));
    CHECK(d.std_db < 1e-6);
    CHECK(d.n > 100);
    // restricting the band restricts the count
    const auto d2 = insertion_loss_diff(dev, base, 5e9, 6e9);
    CHECK(d2.n < d.n);
    CHECK(d2.mean_db == Approx(0.6).epsilon(1e-9));
}

TEST_CASE("pilot SNR measures a tone against the local floor") {
    auto spec = flat_spectrum(5.9e9, 1e3, 801, -150.0);
    const double pilot = spec.f_hz[400];
    spec.psd_dbm[400] = -130.0;
    CHECK(pilot_snr_db(spec, pilot) == Approx(20.0).epsilon(1e-9));

    // a too-weak tone is reported, not returned as a bogus number
    auto weak = flat_spectrum(5.9e9, 1e3, 801, -150.0);
    weak.psd_dbm[400] = -149.0;
    CHECK_THROWS_AS(pilot_snr_db(weak, pilot), LowContrastError);
}

TEST_CASE("pump-on SNR excludes pump and idler bins from the floor") {
    auto spec = flat_spectrum(5.9e9, 1e3, 801, -150.0);
    const double pilot = spec.f_hz[400];
    const double pump = spec.f_hz[420];
    spec.psd_dbm[400] = -120.0;     // pilot
    spec.psd_dbm[420] = -90.0;      // pump leak, must not contaminate the floor
    spec.psd_dbm[440] = -125.0;     // idler at 2 f_pump - f_pilot
    spec.meta["pump_on"] = 1.0;
    spec.meta["pump_f_Hz"] = pump;
    spec.meta["pilot_f_Hz"] = pilot;
    CHECK(pilot_snr_db(spec, pilot) == Approx(30.0).epsilon(1e-9));

    // pump landing on the pilot makes the measurement meaningless
    spec.meta["pump_f_Hz"] = pilot;
    CHECK_THROWS_AS(pilot_snr_db(spec, pilot), LowContrastError);
}

TEST_CASE("delta SNR is the on/off difference at the pilot") {
    auto on = flat_spectrum(5.9e9, 1e3, 801, -150.0);
    auto off = flat_spectrum(5.9e9, 1e3, 801, -150.0);
    const double pilot = on.f_hz[400];
    on.psd_dbm[400] = -125.0;
    off.psd_dbm[400] = -140.0;
    CHECK(delta_snr_db(on, off, pilot) == Approx(15.0).epsilon(1e-9));
}
