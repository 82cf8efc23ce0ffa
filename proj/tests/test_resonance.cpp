#include <doctest.h>

#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"
#include "jpakit/resonance.hpp"
#include "jpakit/rng.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace jpakit;
using namespace jpakit::resonance;
using doctest::Approx;
using std::complex;

namespace {

ComplexReflectionTrace synth_trace(double f_r, double kappa_i, double kappa_ex,
                                   double span, std::size_t n,
                                   const Background& bg, double noise, std::uint64_t seed) {
    ComplexReflectionTrace t;
    Rng rng(seed);
    const double f_ref = f_r;  // center the window on resonance
    for (std::size_t i = 0; i < n; ++i) {
        const double f = f_r - span / 2 + span * static_cast<double>(i) / (n - 1);
        t.f_hz.push_back(f);
        auto s = bg.at(f, f_ref) *
                 reflection_model(constants::two_pi * (f - f_r), kappa_i, kappa_ex);
        if (noise > 0.0) s += rng.complex_normal(noise);
        t.s11.push_back(s);
    }
    return t;
}

} // namespace

TEST_CASE("on-resonance reflection depends only on the rate asymmetry") {
    // kappa_ex/kappa = 0.83 gives the -0.66 dip of a strongly overcoupled port
    const double k = constants::two_pi * 3e6;
    const auto g0 = reflection_model(0.0, 0.17 * k, 0.83 * k);
    CHECK(g0.real() == Approx(-0.66).epsilon(1e-12));
    CHECK(g0.imag() == Approx(0.0));
    // critically coupled: perfect absorption
    const auto gc = reflection_model(0.0, 0.5 * k, 0.5 * k);
    CHECK(std::abs(gc) < 1e-15);
}

TEST_CASE("reflection is passive for any positive rates") {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const double ki = 1e5 * std::exp(4.0 * rng.uniform());
        const double ke = 1e5 * std::exp(4.0 * rng.uniform());
        const double d = (rng.uniform() - 0.5) * 1e9;
        CHECK(std::abs(reflection_model(d, ki, ke)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("half-depth points in power sit exactly half a total linewidth out") {
    const double ki = constants::two_pi * 0.7e6;
    const double ke = constants::two_pi * 2.3e6;
    const double kt = ki + ke;
    const double depth = 1.0 - std::norm(reflection_model(0.0, ki, ke));
    const double half_level = 1.0 - depth / 2.0;
    CHECK(std::norm(reflection_model(+kt / 2.0, ki, ke)) == Approx(half_level).epsilon(1e-12));
    CHECK(std::norm(reflection_model(-kt / 2.0, ki, ke)) == Approx(half_level).epsilon(1e-12));
}

TEST_CASE("background applies amplitude, phase and delay about the reference") {
    Background bg{0.9, 0.3, 20e-9};
    const double f_ref = 6e9;
    const auto at_ref = bg.at(f_ref, f_ref);
    CHECK(std::abs(at_ref) == Approx(0.9).epsilon(1e-12));
    CHECK(std::arg(at_ref) == Approx(0.3).epsilon(1e-12));
    const double df = 1e6;
    const auto shifted = bg.at(f_ref + df, f_ref);
    CHECK(std::arg(shifted) - std::arg(at_ref) ==
          Approx(constants::two_pi * 20e-9 * df).epsilon(1e-9));
}

TEST_CASE("one-port fit recovers parameters through a realistic background") {
    const double f_r = 5.942e9, ki = constants::two_pi * 0.55e6, ke = constants::two_pi * 2.75e6;
    Background bg{0.82, -1.1, 35e-9};
    const auto trace = synth_trace(f_r, ki, ke, 40e6, 401, bg, 0.0, 0);

    const auto fit = fit_one_port(trace);
    CHECK(fit.f_r_hz == Approx(f_r).epsilon(1e-9));
    CHECK(fit.kappa_i == Approx(ki).epsilon(1e-4));
    CHECK(fit.kappa_ex == Approx(ke).epsilon(1e-4));
    CHECK(fit.background.amplitude == Approx(0.82).epsilon(1e-4));
    CHECK(fit.background.delay_s == Approx(35e-9).epsilon(1e-3));
    CHECK(fit.coupling_efficiency() == Approx(ke / (ki + ke)).epsilon(1e-4));
}

TEST_CASE("one-port fit stays within uncertainty under noise") {
    const double f_r = 5.942e9, ki = constants::two_pi * 0.55e6, ke = constants::two_pi * 2.75e6;
    Background bg{0.82, -1.1, 35e-9};
    const auto trace = synth_trace(f_r, ki, ke, 40e6, 401, bg, 0.01, 42);

    const auto fit = fit_one_port(trace);
    CHECK(std::abs(fit.f_r_hz - f_r) < 5.0 * fit.sigma_f_r_hz + 1.0);
    CHECK(std::abs(fit.kappa_i - ki) < 5.0 * fit.sigma_kappa_i);
    CHECK(std::abs(fit.kappa_ex - ke) < 5.0 * fit.sigma_kappa_ex);
    CHECK(fit.sigma_kappa_i > 0.0);
}

TEST_CASE("undercoupled and overcoupled dips of equal depth are distinguished") {
    // |gamma(0)| = 0.5 both ways; winding direction must break the tie
    const double kt = constants::two_pi * 3e6;
    const auto over = synth_trace(6e9, 0.25 * kt, 0.75 * kt, 60e6, 501, {}, 0.0, 0);
    const auto under = synth_trace(6e9, 0.75 * kt, 0.25 * kt, 60e6, 501, {}, 0.0, 0);
    CHECK(fit_one_port(over).coupling_efficiency() == Approx(0.75).epsilon(1e-3));
    CHECK(fit_one_port(under).coupling_efficiency() == Approx(0.25).epsilon(1e-3));
}

TEST_CASE("featureless traces are rejected before fitting") {
    ComplexReflectionTrace t;
    Rng rng(7);
    for (int i = 0; i < 101; ++i) {
        t.f_hz.push_back(6e9 + i * 1e5);
        t.s11.push_back(complex<double>(0.9, 0.0) + rng.complex_normal(0.002));
    }
    CHECK_THROWS_AS(fit_one_port(t), FitRejectedError);
}

TEST_CASE("phase extraction locates the resonance without a full fit") {
    const double f_r = 6.013e9;
    const auto trace = synth_trace(f_r, constants::two_pi * 0.6e6, constants::two_pi * 2.4e6,
                                   30e6, 301, {0.9, 0.4, 25e-9}, 0.0, 0);
    const auto got = resonance_from_phase(trace);
    CHECK(std::abs(got.f_r_hz - f_r) < 2.0 * 30e6 / 300);
    CHECK(!got.resolution_warning);
}

TEST_CASE("phase extraction reports competing dips instead of guessing") {
    const double kt = constants::two_pi * 2e6;
    ComplexReflectionTrace t;
    for (int i = 0; i < 801; ++i) {
        const double f = 5.97e9 + i * 1e5;
        const auto a = reflection_model(constants::two_pi * (f - 5.99e9), 0.3 * kt, 0.7 * kt);
        const auto b = reflection_model(constants::two_pi * (f - 6.03e9), 0.3 * kt, 0.7 * kt);
        t.f_hz.push_back(f);
        t.s11.push_back(a * b);
    }
    CHECK_THROWS_AS(resonance_from_phase(t), AmbiguityError);
    try {
        resonance_from_phase(t);
    } catch (const AmbiguityError& e) {
        REQUIRE(e.candidates.size() == 2);
        CHECK(std::abs(e.candidates[0] - 5.99e9) < 1e6);
        CHECK(std::abs(e.candidates[1] - 6.03e9) < 1e6);
    }
}

TEST_CASE("lorentzian gain fit recovers center, width and height") {
    SpectrumTrace spec;
    spec.rbw_hz = 1e5;
    const double fc = 5.8e9, fwhm = 8e6, floor_w = 1e-18, peak_w = 99e-18;
    for (int i = 0; i < 401; ++i) {
        const double f = fc - 20e6 + i * 1e5;
        const double lor = peak_w / (1.0 + std::pow(2.0 * (f - fc) / fwhm, 2));
        spec.f_hz.push_back(f);
        spec.psd_dbm.push_back(10.0 * std::log10((floor_w + lor) / 1e-3));
    }
    const auto fit = fit_lorentzian_gain(spec);
    CHECK(fit.f_c_hz == Approx(fc).epsilon(1e-9));
    CHECK(fit.fwhm_hz == Approx(fwhm).epsilon(1e-6));
    CHECK(fit.peak_db == Approx(20.0).epsilon(1e-6));
}

TEST_CASE("lorentzian gain fit ignores masked pilot bins") {
    SpectrumTrace spec;
    spec.rbw_hz = 1e5;
    const double fc = 5.8e9, fwhm = 8e6, floor_w = 1e-18, peak_w = 99e-18;
    for (int i = 0; i < 401; ++i) {
        const double f = fc - 20e6 + i * 1e5;
        const double lor = peak_w / (1.0 + std::pow(2.0 * (f - fc) / fwhm, 2));
        spec.f_hz.push_back(f);
        spec.psd_dbm.push_back(10.0 * std::log10((floor_w + lor) / 1e-3));
    }
    // plant a pilot spike off center and mask it out
    spec.psd_dbm[150] += 25.0;
    const std::vector<std::size_t> masked = {150};
    const auto fit = fit_lorentzian_gain(spec, masked);
    CHECK(fit.f_c_hz == Approx(fc).epsilon(1e-8));
    CHECK(fit.fwhm_hz == Approx(fwhm).epsilon(1e-4));
}

TEST_CASE("flat spectra raise a contrast error") {
    SpectrumTrace spec;
    spec.rbw_hz = 1e5;
    for (int i = 0; i < 64; ++i) {
        spec.f_hz.push_back(5.8e9 + i * 1e5);
        spec.psd_dbm.push_back(-150.0);
    }
    CHECK_THROWS_AS(fit_lorentzian_gain(spec), LowContrastError);
}
