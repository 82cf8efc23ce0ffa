#include <doctest.h>

#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"
#include "jpakit/kerr.hpp"

#include <cmath>
#include <vector>

using namespace jpakit;
using namespace jpakit::kerr;
using doctest::Approx;

namespace {

circuit::CircuitModel model_50ohm() {
    circuit::CircuitModel m;
    m.f_geo_hz = 6e9;
    m.f0_hz = 6e9;
    return m;
}

} // namespace

TEST_CASE("josephson inductance from the critical current") {
    // phi0 / (2 pi I_c) with I_c = 10 uA
    CHECK(josephson_inductance(10e-6) == Approx(3.2910597847e-11).epsilon(1e-9));
    CHECK(josephson_inductance(5e-6) == Approx(2.0 * josephson_inductance(10e-6)).epsilon(1e-12));
    CHECK_THROWS_AS(josephson_inductance(0.0), ValidationError);
}

TEST_CASE("photon number oracle at a known operating point") {
    // 1 fW on resonance, f = 6 GHz, kappa_ex/2pi = 2.5 MHz, kappa_i/2pi = 0.5 MHz
    const double ke = constants::two_pi * 2.5e6;
    const double ki = constants::two_pi * 0.5e6;
    const double n = photon_number(1e-15, 6e9, ke, ki, 0.0);
    // 4 ke (P/hf) / kt^2 evaluated independently
    const double flux = 1e-15 / (constants::h * 6e9);
    const double want = 4.0 * ke * flux / ((ke + ki) * (ke + ki));
    CHECK(n == Approx(want).epsilon(1e-12));
    CHECK(n == Approx(44.476).epsilon(1e-3));
}

TEST_CASE("photon number scales linearly in power and drops off resonance") {
    const double ke = constants::two_pi * 2e6, ki = constants::two_pi * 1e6;
    const double n1 = photon_number(1e-15, 6e9, ke, ki, 0.0);
    const double n2 = photon_number(2e-15, 6e9, ke, ki, 0.0);
    CHECK(n2 == Approx(2.0 * n1).epsilon(1e-12));
    // half linewidth out: response halves
    const double nh = photon_number(1e-15, 6e9, ke, ki, (ke + ki) / 2.0);
    CHECK(nh == Approx(n1 / 2.0).epsilon(1e-12));
}

TEST_CASE("predicted Kerr is softening and matches the design magnitude") {
    const auto m = model_50ohm();
    const auto s = circuit::junction_state_from_inductance(josephson_inductance(10e-6), m);
    const double k = kerr_predict(s);
    CHECK(k < 0.0);
    // design point: |K| within a factor of two of 1.4e3 s^-1
    CHECK(std::abs(k) > 0.7e3);
    CHECK(std::abs(k) < 2.8e3);
    // regression pin for the exact value this model produces
    CHECK(k == Approx(-1376.16).epsilon(1e-3));
    CHECK(kerr_design(10e-6, m) == Approx(k).epsilon(1e-12));
}

TEST_CASE("Kerr magnitude falls as the cube of the critical current") {
    const auto m = model_50ohm();
    const double k10 = kerr_design(10e-6, m);
    const double k20 = kerr_design(20e-6, m);
    CHECK(k10 / k20 == Approx(8.0).epsilon(0.05));
}

TEST_CASE("sweep extraction recovers a known Kerr from clean tables") {
    const double ki = constants::two_pi * 0.5e6, ke = constants::two_pi * 2.5e6;
    const double f_r0 = 5.942e9, k_true = -constants::two_pi * 300.0;
    // table built by the same dip-tracking convention the extractor assumes:
    // the recorded resonance moves at half the per-photon rate
    std::vector<PowerSweepPoint> pts;
    for (double p = 1e-17; p < 2e-15; p *= 1.5) {
        double f_dip = f_r0;
        for (int it = 0; it < 4; ++it) {
            const double n = photon_number(p, f_dip, ke, ki, 0.0);
            f_dip = f_r0 + 0.5 * k_true * n / constants::two_pi;
        }
        pts.push_back({p, f_dip, f_dip});
    }
    const auto est = kerr_from_sweep(pts, ki, ke);
    CHECK(est.k == Approx(k_true).epsilon(1e-3));
    CHECK(est.points_used >= 3);
    CHECK(est.k_per_power < 0.0);
}

TEST_CASE("sweep extraction windows out strongly shifted points") {
    const double ki = constants::two_pi * 0.5e6, ke = constants::two_pi * 2.5e6;
    const double f_r0 = 5.942e9, k_true = -constants::two_pi * 300.0;
    std::vector<PowerSweepPoint> pts;
    // highest powers drag the dip far beyond a quarter linewidth
    for (double p = 1e-17; p < 1e-12; p *= 3.0) {
        double f_dip = f_r0;
        for (int it = 0; it < 12; ++it) {
            const double n = photon_number(p, f_dip, ke, ki, 0.0);
            f_dip = f_r0 + 0.5 * k_true * n / constants::two_pi;
        }
        pts.push_back({p, f_dip, f_dip});
    }
    const auto est = kerr_from_sweep(pts, ki, ke);
    CHECK(est.points_used < pts.size());
    CHECK(est.k == Approx(k_true).epsilon(0.02));
}

TEST_CASE("sweep extraction needs at least three points") {
    std::vector<PowerSweepPoint> pts = {{1e-16, 6e9, 6e9}, {2e-16, 6e9, 6e9}};
    CHECK_THROWS_AS(kerr_from_sweep(pts, 1e6, 1e6), ValidationError);
}
