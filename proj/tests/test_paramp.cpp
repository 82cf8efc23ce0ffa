#include <doctest.h>

#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"
#include "jpakit/paramp.hpp"
#include "jpakit/rng.hpp"

#include <cmath>
#include <complex>

using namespace jpakit;
using namespace jpakit::paramp;
using doctest::Approx;
using std::complex;

TEST_CASE("vacuum level reproduces the quantum-limit temperatures") {
    // one full photon (2V) expressed as a temperature
    CHECK(2.0 * vacuum_level(5.942e9).equivalent_temperature_k() ==
          Approx(0.285).epsilon(0.005));
    CHECK(2.0 * vacuum_level(5.7839e9).equivalent_temperature_k() ==
          Approx(0.278).epsilon(0.005));
    // tight pins of the same numbers
    CHECK(2.0 * vacuum_level(5.942e9).equivalent_temperature_k() ==
          Approx(0.2851716).epsilon(1e-5));
    CHECK(2.0 * vacuum_level(5.7839e9).equivalent_temperature_k() ==
          Approx(0.2775832).epsilon(1e-5));
}

TEST_CASE("temperature conversion round-trips bit-for-bit") {
    for (double t : {0.1, 0.41, 1.61, 4.2, 300.0}) {
        const auto d = NoiseDensity::from_temperature_k(t);
        CHECK(d.equivalent_temperature_k() == t);
    }
}

TEST_CASE("idler gain follows from photon-flux conservation") {
    // unity signal gain with loss rho = 1/2 forces |g_i|^2 = 4/3
    CHECK(idler_gain_from_sum_rule({1.0, 0.0}, 0.5) == Approx(4.0 / 3.0).epsilon(1e-12));
    // lossless: |g_i|^2 = |g_s|^2 - 1
    CHECK(idler_gain_from_sum_rule({3.0, 0.0}, 0.0) == Approx(8.0).epsilon(1e-12));
    // sub-unity lossless gain is unphysical
    CHECK_THROWS_AS(idler_gain_from_sum_rule({0.1, 0.0}, 0.0), ValidationError);
}

TEST_CASE("constructed gain pairs satisfy the sum rule identically") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double rho = rng.uniform();
        const complex<double> gs{1.0 + 5.0 * rng.uniform(), 2.0 * rng.uniform() - 1.0};
        GainPair g;
        g.g_s = gs;
        g.kappa_ratio = rho;
        g.g_i = std::sqrt(idler_gain_from_sum_rule(gs, rho));
        CHECK(std::abs(sum_rule_residual(g)) < 1e-12);
    }
}

TEST_CASE("off state passes vacuum through unchanged") {
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
        const double ki = std::exp(3.0 * rng.uniform());
        const double ke = std::exp(3.0 * rng.uniform());
        const double rho = ki / ke;
        GainPair g;
        g.g_s = complex<double>((1.0 - rho) / (1.0 + rho), 0.0);
        g.g_i = 0.0;
        g.kappa_ratio = rho;
        CHECK(std::abs(sum_rule_residual(g)) < 1e-12);
        const auto v = vacuum_level(6e9);
        const auto out = output_psd(v, g, 6e9);
        CHECK(out.w_per_hz == Approx(v.w_per_hz).epsilon(1e-12));
    }
}

TEST_CASE("added noise reaches the half-photon limit without loss") {
    const double f = 5.8e9;
    const double v = vacuum_level(f).w_per_hz;
    CHECK(added_noise({1e4, 0.0}, 0.0, f).w_per_hz == Approx(v).epsilon(1e-6));
    // with loss the high-gain limit is the device quantum limit V(1 + 2 rho)
    const double rho = 0.21;
    CHECK(added_noise({1e4, 0.0}, rho, f).w_per_hz ==
          Approx(v * (1.0 + 2.0 * rho)).epsilon(1e-3));
    // loss only ever adds noise
    CHECK(added_noise({3.0, 0.0}, 0.3, f).w_per_hz >
          added_noise({3.0, 0.0}, 0.0, f).w_per_hz);
}

TEST_CASE("unity-gain lossless chain reduces to vacuum plus HEMT") {
    const double f = 5.784e9;
    const double t_h = 1.61;
    const double v_k = vacuum_level(f).equivalent_temperature_k();
    // G = 1, eta_s = 1, no internal loss: T = V/kB + T_hemt
    CHECK(expected_total_input_noise_k(0.0, 1.0, 1.0, t_h, f) ==
          Approx(v_k + t_h).epsilon(1e-12));
}

TEST_CASE("expected noise is monotone in every chain parameter") {
    const double f = 5.784e9;
    const double base = expected_total_input_noise_k(20.3, 0.83, 0.8, 1.61, f);
    CHECK(expected_total_input_noise_k(25.0, 0.83, 0.8, 1.61, f) < base);   // more gain
    CHECK(expected_total_input_noise_k(20.3, 0.83, 0.9, 1.61, f) < base);   // better eta_s
    CHECK(expected_total_input_noise_k(20.3, 0.78, 0.8, 1.61, f) > base);   // more internal loss
    CHECK(expected_total_input_noise_k(20.3, 0.83, 0.8, 2.0, f) > base);    // hotter HEMT
}

TEST_CASE("expected noise validates its domains") {
    CHECK_THROWS_AS(expected_total_input_noise_k(20.0, 0.0, 0.8, 1.6, 6e9), ValidationError);
    CHECK_THROWS_AS(expected_total_input_noise_k(20.0, 1.2, 0.8, 1.6, 6e9), ValidationError);
    CHECK_THROWS_AS(expected_total_input_noise_k(20.0, 0.8, 0.0, 1.6, 6e9), ValidationError);
}

TEST_CASE("uncertainty propagation is first-order linear") {
    auto f = [](std::span<const double> x) { return 3.0 * x[0] - 2.0 * x[1]; };
    const UncertainValue a{1.0, 0.1}, b{2.0, 0.2};
    std::array<UncertainValue, 2> in = {a, b};
    const auto out = propagate_uncertainty(f, in);
    CHECK(out.value == Approx(-1.0).epsilon(1e-12));
    CHECK(out.sigma == Approx(std::hypot(0.3, 0.4)).epsilon(1e-6));

    std::array<UncertainValue, 2> doubled = {UncertainValue{1.0, 0.2}, UncertainValue{2.0, 0.4}};
    CHECK(propagate_uncertainty(f, doubled).sigma == Approx(2.0 * out.sigma).epsilon(1e-6));

    std::array<UncertainValue, 2> exact = {UncertainValue{1.0, 0.0}, UncertainValue{2.0, 0.0}};
    CHECK(propagate_uncertainty(f, exact).sigma == 0.0);
}

TEST_CASE("noise band covers the central value and widens with drift") {
    NoiseBandInputs in;
    in.gain_db = {20.3, 0.2};
    in.coupling_efficiency = {0.83, 0.02};
    in.eta_s = {0.8, 0.03};
    in.t_hemt_k = {1.61, 0.05};
    in.f_hz = 5.784e9;
    in.drift_db = 0.0;
    const auto narrow = expected_noise_band(in);
    const double central =
        expected_total_input_noise_k(20.3, 0.83, 0.8, 1.61, 5.784e9);
    CHECK(narrow.value == Approx(central).epsilon(1e-12));
    CHECK(narrow.sigma > 0.0);

    in.drift_db = 0.2;
    const auto wide = expected_noise_band(in);
    CHECK(wide.sigma > narrow.sigma);
}
