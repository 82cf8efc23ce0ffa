#include <doctest.h>

#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"
#include "jpakit/io.hpp"
#include "jpakit/kerr.hpp"
#include "jpakit/resonance.hpp"
#include "jpakit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace jpakit;
using namespace jpakit::sim;
using doctest::Approx;

namespace {

KerrCavity paper_like_cavity() {
    KerrCavity c;
    c.f_r_hz = 5.942e9;
    c.kappa_i = constants::two_pi * 0.5e6;
    c.kappa_ex = constants::two_pi * 2.5e6;
    c.k = -constants::two_pi * 250.0;
    return c;
}

std::vector<double> grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

// Power at which the low branch terminates (up-switching edge): the
// smaller-n knee of the S-curve, where d(drive)/dn = 0. Gain on the low
// branch diverges approaching this power, not the lower multivaluedness
// onset that critical_power_w reports.
double up_switch_power_w(const KerrCavity& c, double f_pump_hz) {
    const double delta = constants::two_pi * (f_pump_hz - c.f_r_hz);
    const double hk = 0.5 * c.kappa_tot();
    const double disc = delta * delta - 3.0 * hk * hk;
    REQUIRE(disc > 0.0);
    REQUIRE(delta * c.k > 0.0);
    const double n_minus =
        (4.0 * delta * c.k - 2.0 * std::abs(c.k) * std::sqrt(disc)) / (6.0 * c.k * c.k);
    const double dtil = delta - c.k * n_minus;
    const double drive = n_minus * (hk * hk + dtil * dtil);
    return drive * constants::h * f_pump_hz / c.kappa_ex;
}

} // namespace

TEST_CASE("linear cavity photon number matches the Lorentzian closed form") {
    KerrCavity c = paper_like_cavity();
    c.k = 0.0;
    for (double df : {-4e6, -1e6, 0.0, 0.3e6, 5e6}) {
        PumpDrive d{c.f_r_hz + df, 1e-15};
        const auto ss = steady_state(c, d);
        const double delta = constants::two_pi * df;
        const double want = c.kappa_ex * d.p_pump_w / (constants::h * d.f_pump_hz) /
                            (0.25 * c.kappa_tot() * c.kappa_tot() + delta * delta);
        CHECK(ss.n == Approx(want).epsilon(1e-12));
        CHECK(ss.branch_count == 1);
    }
}

TEST_CASE("bistability appears only past the detuning threshold") {
    KerrCavity c = paper_like_cavity();
    // inside sqrt(3)/2 kappa: no power can bifurcate a softening cavity
    CHECK(std::isinf(critical_power_w(c, c.f_r_hz - 0.5 * c.kappa_tot() / constants::two_pi)));
    // blue side never bifurcates for k < 0
    CHECK(std::isinf(critical_power_w(c, c.f_r_hz + 2.0 * c.kappa_tot() / constants::two_pi)));
    // beyond threshold a finite critical power exists
    const double f_red = c.f_r_hz - 1.0 * c.kappa_tot() / constants::two_pi;
    const double pc = critical_power_w(c, f_red);
    CHECK(std::isfinite(pc));
    CHECK(pc > 0.0);
}

TEST_CASE("root count switches from one to three across the critical power") {
    KerrCavity c = paper_like_cavity();
    const double f_red = c.f_r_hz - 1.2 * c.kappa_tot() / constants::two_pi;
    const double pc = critical_power_w(c, f_red);
    const auto below = steady_state(c, {f_red, 0.98 * pc});
    const auto above = steady_state(c, {f_red, 1.02 * pc});
    CHECK(below.branch_count == 1);
    CHECK(above.branch_count == 3);
    const auto lo = steady_state(c, {f_red, 1.02 * pc}, Branch::low);
    const auto hi = steady_state(c, {f_red, 1.02 * pc}, Branch::high);
    CHECK(lo.n < hi.n);
}

TEST_CASE("signal gain is unity far away and large near the branch edge") {
    KerrCavity c = paper_like_cavity();
    const double f_red = c.f_r_hz - 1.0 * c.kappa_tot() / constants::two_pi;
    const double p_up = up_switch_power_w(c, f_red);
    CHECK(p_up > critical_power_w(c, f_red));
    PumpDrive d{f_red, 0.999 * p_up};

    const auto far = gain_pair(c, d, 80.0 * c.kappa_tot());
    CHECK(std::abs(far.g_s) == Approx(1.0).epsilon(1e-2));
    CHECK(std::abs(far.g_i) < 0.05);

    const auto near = gain_pair(c, d, 1e-4 * c.kappa_tot());
    CHECK(10.0 * std::log10(std::norm(near.g_s)) > 20.0);
    CHECK(std::abs(paramp::sum_rule_residual(near)) < 1e-9);
    CHECK(std::abs(paramp::sum_rule_residual(far)) < 1e-9);
}

TEST_CASE("gain at the branch edge either diverges or is refused") {
    KerrCavity c = paper_like_cavity();
    const double f_red = c.f_r_hz - 1.0 * c.kappa_tot() / constants::two_pi;
    const double p_up = up_switch_power_w(c, f_red);
    try {
        const auto g = gain_pair(c, {f_red, (1.0 - 1e-6) * p_up}, 0.0, Branch::low);
        CHECK(10.0 * std::log10(std::norm(g.g_s)) > 30.0);
    } catch (const StabilityError&) {
        CHECK(true);
    }
}

TEST_CASE("synthetic reflection reduces to the analytic model when linear") {
    KerrCavity c = paper_like_cavity();
    c.k = 0.0;
    const auto g = grid(c.f_r_hz - 20e6, c.f_r_hz + 20e6, 101);
    const auto t = synth_reflection(c, 1e-16, g, 0.0, 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto want = resonance::reflection_model(
            constants::two_pi * (g[i] - c.f_r_hz), c.kappa_i, c.kappa_ex);
        CHECK(std::abs(t.s11[i] - want) < 1e-12);
    }
}

TEST_CASE("a softening cavity drags the dip red as power rises") {
    KerrCavity c = paper_like_cavity();
    const auto g = grid(c.f_r_hz - 10e6, c.f_r_hz + 10e6, 2001);
    auto dip_of = [&](double p_w) {
        const auto t = synth_reflection(c, p_w, g, 0.0, 0);
        std::size_t imin = 0;
        for (std::size_t i = 1; i < t.size(); ++i)
            if (std::abs(t.s11[i]) < std::abs(t.s11[imin])) imin = i;
        return t.f_hz[imin];
    };
    const double quiet = dip_of(1e-18);
    const double loud = dip_of(5e-15);
    CHECK(quiet == Approx(c.f_r_hz).epsilon(1e-6));
    CHECK(loud < quiet - 3e4);
}

TEST_CASE("reflection synthesis is deterministic per seed") {
    KerrCavity c = paper_like_cavity();
    const auto g = grid(c.f_r_hz - 15e6, c.f_r_hz + 15e6, 201);
    const auto a = io::reflection_to_csv(synth_reflection(c, 1e-16, g, 0.02, 99));
    const auto b = io::reflection_to_csv(synth_reflection(c, 1e-16, g, 0.02, 99));
    const auto other = io::reflection_to_csv(synth_reflection(c, 1e-16, g, 0.02, 100));
    CHECK(a == b);
    CHECK(a != other);
}

TEST_CASE("power-sweep synthesis closes the loop with the Kerr extractor") {
    KerrCavity c = paper_like_cavity();
    std::vector<double> powers;
    for (double p = 5e-18; p < 3e-15; p *= 1.6) powers.push_back(p);
    const auto rows = synth_power_sweep(c, powers, 0.0, 0);
    const auto est = kerr::kerr_from_sweep(rows, c.kappa_i, c.kappa_ex);
    CHECK(est.k == Approx(c.k).epsilon(1e-3));
}

TEST_CASE("spectrum synthesis carries the pilot and idler through the chain") {
    KerrCavity c = paper_like_cavity();
    const double f_red = c.f_r_hz - 1.0 * c.kappa_tot() / constants::two_pi;
    const double p_up = up_switch_power_w(c, f_red);
    PumpDrive d{f_red, 0.985 * p_up};
    chain::NoiseChain ch;
    ch.eta_c_off = 0.87;
    ch.eta_s = 0.8;
    ch.t_hemt_k = 1.61;

    const double rbw = 10e3;
    const double pilot_f = f_red + 150e3;
    const auto pair = synth_spectrum(c, d, ch, pilot_f, 1e-15, rbw,
                                     c.f_r_hz - 30e6, c.f_r_hz + 30e6, 5);
    const auto& on = pair.pump_on;
    const auto& off = pair.pump_off;
    REQUIRE(on.size() == off.size());
    CHECK(on.meta.at("pump_on") == 1.0);
    CHECK(off.meta.at("pump_on") == 0.0);

    // pilot visible in both, brighter with the pump on
    const double snr_gain = chain::delta_snr_db(on, off, pilot_f);
    CHECK(snr_gain > 6.0);

    // pilot-power ratio reproduces the cavity gain through the bookkeeping
    const std::size_t bp = on.bin_of(pilot_f);
    const double p_on = io::dbm_to_w(on.psd_dbm[bp]);
    const double p_off = io::dbm_to_w(off.psd_dbm[bp]);
    const double g_est = chain::gain_from_pilot(p_on, p_off, ch.eta_c_off);
    const double g_true = std::norm(gain_pair(c, d, constants::two_pi * (pilot_f - d.f_pump_hz)).g_s);
    CHECK(g_est == Approx(g_true).epsilon(0.05));

    // determinism
    const auto again = synth_spectrum(c, d, ch, pilot_f, 1e-15, rbw,
                                      c.f_r_hz - 30e6, c.f_r_hz + 30e6, 5);
    CHECK(io::spectrum_to_csv(again.pump_on) == io::spectrum_to_csv(on));
}

TEST_CASE("gate map interpolates and guards its range") {
    const auto m = GateMap::default_map();
    m.validate();
    CHECK(m.at(m.vg_v.front()) == Approx(m.l_j_h.front()).epsilon(1e-12));
    CHECK(m.at(m.vg_v.back()) == Approx(m.l_j_h.back()).epsilon(1e-12));
    const double mid = m.at(-1.25);
    CHECK(mid > m.l_j_h.back());
    CHECK(mid < m.l_j_h.front());
    CHECK_THROWS_AS(m.at(+1.0), ValidationError);
}

TEST_CASE("gate sweep synthesis closes the loop with the circuit fits") {
    circuit::CircuitModel truth;
    truth.f_geo_hz = 7.2e9;
    truth.f0_hz = 6.2e9;
    truth.alpha_l = 2.4e-3;
    truth.r_j_ohm = 15e3;
    truth.c_k_f = 1.1e-14;

    const auto map = GateMap::default_map();
    const auto vg = grid(-2.3, -0.1, 23);
    const auto rows = synth_gate_sweep(map, truth, vg, 0.0, 0);
    REQUIRE(rows.size() == vg.size());

    // opening the channel (less negative gate) raises the resonance
    CHECK(rows.front().f_r_hz < rows.back().f_r_hz);

    std::vector<circuit::RatePoint> ki, ke;
    for (const auto& r : rows) {
        ki.push_back({r.f_r_hz, r.kappa_i, 0.0});
        ke.push_back({r.f_r_hz, r.kappa_ex, 0.0});
    }
    circuit::CircuitModel geo = truth;
    geo.alpha_l = 0.0;
    geo.r_j_ohm = 1e4;
    geo.c_k_f = 0.0;
    const auto dis = circuit::fit_dissipation(ki, geo);
    const auto cpl = circuit::fit_coupling(ke, geo);
    CHECK(dis.alpha_l == Approx(truth.alpha_l).epsilon(1e-3));
    CHECK(dis.r_j_ohm == Approx(truth.r_j_ohm).epsilon(1e-3));
    CHECK(cpl.c_k_f == Approx(truth.c_k_f).epsilon(1e-3));
}

TEST_CASE("simulator inputs are validated") {
    KerrCavity c = paper_like_cavity();
    CHECK_THROWS_AS(steady_state(c, {0.0, 1e-15}), ValidationError);
    KerrCavity bad = c;
    bad.kappa_ex = -1.0;
    CHECK_THROWS_AS(steady_state(bad, {6e9, 1e-15}), ValidationError);
    const auto g3 = grid(5.9e9, 6.0e9, 3);
    CHECK_THROWS_AS(synth_reflection(c, 1e-16, g3, 0.0, 0), ValidationError);
    std::vector<double> two_powers = {1e-16, 2e-16};
    CHECK_THROWS_AS(synth_power_sweep(c, two_powers, 0.0, 0), ValidationError);
}
