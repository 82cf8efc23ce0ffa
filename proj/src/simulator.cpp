#include "jpakit/simulator.hpp"
#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"
#include "jpakit/resonance.hpp"
#include "jpakit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_poly.h>

namespace jpakit::sim {

using namespace constants;

void KerrCavity::validate() const {
    if (!(f_r_hz > 0.0))
        throw ValidationError("Kerr cavity requires a positive resonance frequency");
    if (kappa_i < 0.0 || !(kappa_ex > 0.0))
        throw ValidationError("Kerr cavity requires kappa_i >= 0 and kappa_ex > 0");
    if (!std::isfinite(k))
        throw ValidationError("Kerr cavity requires a finite Kerr coefficient");
}

namespace {

// Positive real roots of n ((kappa/2)^2 + (delta - k n)^2) = drive, solved in
// units u = n |k| / (kappa/2) for conditioning. Ascending order.
std::vector<double> cubic_roots(double kappa, double delta, double k, double drive) {
    const double hk = 0.5 * kappa;
    if (drive <= 0.0) return {0.0};
    if (k == 0.0) return {drive / (hk * hk + delta * delta)};
    gsl_set_error_handler_off();

    const double s = k > 0.0 ? 1.0 : -1.0;
    const double dbar = delta / hk;
    const double drive_bar = drive * std::abs(k) / (hk * hk * hk);

    double r[3];
    const int nr = gsl_poly_solve_cubic(-2.0 * s * dbar, 1.0 + dbar * dbar, -drive_bar,
                                        &r[0], &r[1], &r[2]);
    std::vector<double> out;
    for (int i = 0; i < nr; ++i)
        if (r[i] > 0.0) out.push_back(r[i] * hk / std::abs(k));
    std::sort(out.begin(), out.end());
    if (out.empty())
        throw Error(Error::Category::numerical, "steady-state cubic produced no physical root");
    return out;
}

double pump_detuning(const KerrCavity& c, double f_pump_hz) {
    if (!(f_pump_hz > 0.0))
        throw ValidationError("pump frequency must be positive");
    return two_pi * (f_pump_hz - c.f_r_hz);
}

double drive_rate(const KerrCavity& c, const PumpDrive& d) {
    if (d.p_pump_w < 0.0)
        throw ValidationError("pump power must be >= 0");
    return c.kappa_ex * d.p_pump_w / (h * d.f_pump_hz);
}

} // namespace

SteadyState steady_state(const KerrCavity& c, const PumpDrive& d, Branch branch) {
    c.validate();
    SteadyState out;
    out.delta_p = pump_detuning(c, d.f_pump_hz);
    const auto roots = cubic_roots(c.kappa_tot(), out.delta_p, c.k, drive_rate(c, d));
    out.branch_count = static_cast<int>(roots.size());
    out.n = branch == Branch::low ? roots.front() : roots.back();
    return out;
}

double critical_power_w(const KerrCavity& c, double f_pump_hz) {
    c.validate();
    const double delta = pump_detuning(c, f_pump_hz);
    const double hk = 0.5 * c.kappa_tot();
    const double k = c.k;
    if (k == 0.0 || delta * k <= 0.0 || delta * delta <= 3.0 * hk * hk)
        return std::numeric_limits<double>::infinity();
    // lower knee of the S-curve: smaller-|n| extremum of drive(n)
    const double root = std::sqrt(delta * delta - 3.0 * hk * hk);
    const double n_knee = (4.0 * delta * k + 2.0 * std::abs(k) * root) / (6.0 * k * k);
    const double y = delta - k * n_knee;
    const double drive = n_knee * (hk * hk + y * y);
    return drive * h * f_pump_hz / c.kappa_ex;
}

paramp::GainPair gain_pair(const KerrCavity& c, const PumpDrive& d, double delta,
                           Branch branch) {
    const auto ss = steady_state(c, d, branch);
    const double hk = 0.5 * c.kappa_tot();
    const double dtilde = ss.delta_p - 2.0 * c.k * ss.n;

    // det(M) at delta = 0 equals d(drive)/dn; it vanishes at the knees of the
    // S-curve where the linearization breaks down.
    const double margin = hk * hk + dtilde * dtilde - c.k * c.k * ss.n * ss.n;
    if (margin <= 0.0)
        throw StabilityError("operating point sits on the bifurcation edge or an unstable branch");

    // alpha^2 carries the pump phase; alpha_in taken real.
    const std::complex<double> alpha =
        std::sqrt(c.kappa_ex * d.p_pump_w / (h * d.f_pump_hz)) /
        std::complex<double>(hk, -(ss.delta_p - c.k * ss.n));
    const std::complex<double> ka2 = c.k * alpha * alpha;

    const std::complex<double> m11(hk, -(delta + dtilde));
    const std::complex<double> m22(hk, -(delta - dtilde));
    const std::complex<double> m12(0.0, 1.0);
    const std::complex<double> det = m11 * m22 - (m12 * ka2) * (-m12 * std::conj(ka2));

    paramp::GainPair g;
    g.detuning = delta;
    g.kappa_ratio = c.kappa_ex > 0.0 ? c.kappa_i / c.kappa_ex : 0.0;
    g.g_s = c.kappa_ex * m22 / det - 1.0;
    g.g_i = -c.kappa_ex * (m12 * ka2) / det;
    return g;
}

ComplexReflectionTrace synth_reflection(const KerrCavity& c, double probe_power_w,
                                        std::span<const double> f_grid_hz,
                                        double noise_sigma, std::uint64_t seed,
                                        Branch branch) {
    c.validate();
    if (probe_power_w < 0.0)
        throw ValidationError("probe power must be >= 0");
    if (noise_sigma < 0.0)
        throw ValidationError("noise sigma must be >= 0");
    if (f_grid_hz.size() < 5)
        throw ValidationError("synth_reflection requires at least 5 grid points");

    Rng rng(seed);
    ComplexReflectionTrace out;
    out.f_hz.assign(f_grid_hz.begin(), f_grid_hz.end());
    out.s11.resize(f_grid_hz.size());
    out.probe_power_dbm = 10.0 * std::log10(std::max(probe_power_w, 1e-300) / 1e-3);

    for (std::size_t i = 0; i < f_grid_hz.size(); ++i) {
        const double f = f_grid_hz[i];
        const double delta = two_pi * (f - c.f_r_hz);
        const double drive = c.kappa_ex * probe_power_w / (h * f);
        const auto roots = cubic_roots(c.kappa_tot(), delta, c.k, drive);
        const double n = branch == Branch::low ? roots.front() : roots.back();
        out.s11[i] = resonance::reflection_model(delta - c.k * n, c.kappa_i, c.kappa_ex);
        if (noise_sigma > 0.0) out.s11[i] += rng.complex_normal(noise_sigma);
    }
    out.validate();
    return out;
}

std::vector<kerr::PowerSweepPoint> synth_power_sweep(const KerrCavity& c,
                                                     std::span<const double> powers_w,
                                                     double jitter_sigma_hz,
                                                     std::uint64_t seed) {
    c.validate();
    if (powers_w.size() < 3)
        throw ValidationError("synth_power_sweep requires at least 3 powers");
    if (jitter_sigma_hz < 0.0)
        throw ValidationError("jitter sigma must be >= 0");

    Rng rng(seed);
    const double hk = 0.5 * c.kappa_tot();
    std::vector<kerr::PowerSweepPoint> out;
    out.reserve(powers_w.size());
    for (double p : powers_w) {
        if (p < 0.0)
            throw ValidationError("synth_power_sweep: powers must be >= 0");
        // dip-tracking probe: on the shifted resonance, n = drive/(kappa/2)^2,
        // and the recorded resonance moves at k/2 per photon
        double f_dip = c.f_r_hz;
        for (int it = 0; it < 4; ++it) {
            const double n = c.kappa_ex * p / (h * f_dip) / (hk * hk);
            f_dip = c.f_r_hz + 0.5 * c.k * n / two_pi;
        }
        kerr::PowerSweepPoint row;
        row.p_in_w = p;
        row.f_signal_hz = f_dip;
        row.f_r_hz = f_dip + (jitter_sigma_hz > 0.0 ? jitter_sigma_hz * rng.normal() : 0.0);
        out.push_back(row);
    }
    return out;
}

SpectrumPair synth_spectrum(const KerrCavity& c, const PumpDrive& d,
                            const chain::NoiseChain& ch,
                            double pilot_f_hz, double pilot_p_w,
                            double rbw_hz, double f_lo_hz, double f_hi_hz,
                            std::uint64_t seed,
                            double pump_leak_fraction) {
    c.validate();
    if (!(rbw_hz > 0.0))
        throw ValidationError("synth_spectrum requires rbw > 0");
    if (!(f_lo_hz > 0.0) || !(f_hi_hz > f_lo_hz))
        throw ValidationError("synth_spectrum requires 0 < f_lo < f_hi");
    if (!(pilot_p_w >= 0.0) || pump_leak_fraction < 0.0)
        throw ValidationError("synth_spectrum requires nonnegative powers");
    const std::size_t nbins = static_cast<std::size_t>(std::floor((f_hi_hz - f_lo_hz) / rbw_hz));
    if (nbins < 16)
        throw ValidationError("synth_spectrum span covers fewer than 16 bins");
    if (pilot_f_hz <= f_lo_hz || pilot_f_hz >= f_hi_hz)
        throw ValidationError("pilot tone must lie inside the span");

    Rng rng(seed);
    const double t_hemt_w = k_b * ch.t_hemt_k;
    const double delta_pilot = two_pi * (pilot_f_hz - d.f_pump_hz);
    const auto pair_pilot = gain_pair(c, d, delta_pilot);

    SpectrumPair out;
    auto init = [&](SpectrumTrace& s, bool on) {
        s.f_hz.resize(nbins);
        s.psd_dbm.resize(nbins);
        s.rbw_hz = rbw_hz;
        s.meta["pump_on"] = on ? 1.0 : 0.0;
        s.meta["pump_f_Hz"] = d.f_pump_hz;
        s.meta["pilot_f_Hz"] = pilot_f_hz;
        for (std::size_t i = 0; i < nbins; ++i)
            s.f_hz[i] = f_lo_hz + (static_cast<double>(i) + 0.5) * rbw_hz;
    };
    init(out.pump_on, true);
    init(out.pump_off, false);

    // pump on: amplified vacuum floor through the chain plus coherent tones
    for (std::size_t i = 0; i < nbins; ++i) {
        const double f = out.pump_on.f_hz[i];
        const double v = paramp::vacuum_level(f).w_per_hz;
        const double delta = two_pi * (f - d.f_pump_hz);
        const auto g = gain_pair(c, d, delta);
        const double s_dev = paramp::output_psd({v}, g, f).w_per_hz;
        double psd = (ch.eta_s * s_dev + (1.0 - ch.eta_s) * v + t_hemt_w) * rng.exponential();
        if (i == out.pump_on.bin_of(pilot_f_hz))
            psd += ch.eta_s * std::norm(pair_pilot.g_s) * pilot_p_w / rbw_hz;
        const double f_idler = 2.0 * d.f_pump_hz - pilot_f_hz;
        if (f_idler > f_lo_hz && f_idler < f_hi_hz && i == out.pump_on.bin_of(f_idler))
            psd += ch.eta_s * std::norm(pair_pilot.g_i) * pilot_p_w / rbw_hz;
        if (d.f_pump_hz > f_lo_hz && d.f_pump_hz < f_hi_hz && i == out.pump_on.bin_of(d.f_pump_hz))
            psd += ch.eta_s * pump_leak_fraction * d.p_pump_w / rbw_hz;
        out.pump_on.psd_dbm[i] = 10.0 * std::log10(psd * rbw_hz / 1e-3);
    }

    // pump off: bare vacuum plus HEMT; the pilot reflects off the detuned
    // cavity and takes the cold-circulator path
    for (std::size_t i = 0; i < nbins; ++i) {
        const double f = out.pump_off.f_hz[i];
        const double v = paramp::vacuum_level(f).w_per_hz;
        double psd = (v + t_hemt_w) * rng.exponential();
        if (i == out.pump_off.bin_of(pilot_f_hz))
            psd += ch.eta_c_off * ch.eta_s * pilot_p_w / rbw_hz;
        out.pump_off.psd_dbm[i] = 10.0 * std::log10(psd * rbw_hz / 1e-3);
    }

    out.pump_on.validate();
    out.pump_off.validate();
    return out;
}

double GateMap::at(double vg) const {
    validate();
    if (vg < vg_v.front() || vg > vg_v.back())
        throw ValidationError("gate voltage outside the mapped range");
    auto it = std::lower_bound(vg_v.begin(), vg_v.end(), vg);
    if (it == vg_v.begin()) return l_j_h.front();
    const std::size_t j = static_cast<std::size_t>(it - vg_v.begin());
    if (j >= vg_v.size()) return l_j_h.back();
    const double t = (vg - vg_v[j - 1]) / (vg_v[j] - vg_v[j - 1]);
    return l_j_h[j - 1] + t * (l_j_h[j] - l_j_h[j - 1]);
}

void GateMap::validate() const {
    if (vg_v.size() < 2 || vg_v.size() != l_j_h.size())
        throw ValidationError("gate map requires matching vg/inductance tables, >= 2 rows");
    for (std::size_t i = 0; i < vg_v.size(); ++i) {
        if (i > 0 && vg_v[i] <= vg_v[i - 1])
            throw ValidationError("gate map voltages must be strictly increasing");
        if (!(l_j_h[i] > 0.0) || !std::isfinite(l_j_h[i]))
            throw ValidationError("gate map inductances must be positive and finite");
    }
}

GateMap GateMap::default_map() {
    // Smooth depletion curve: critical current rises from near pinch-off at
    // -2.5 V to 10 uA at 0 V.
    GateMap m;
    const int n = 51;
    const double vg_lo = -2.6, vg_hi = 0.0;
    const double i_open = 10e-6, i_floor = 0.4e-6;
    for (int i = 0; i < n; ++i) {
        const double vg = vg_lo + (vg_hi - vg_lo) * i / (n - 1);
        double t = (vg + 2.5) / 2.5;
        t = std::clamp(t, 0.0, 1.0);
        const double shape = t * t * (3.0 - 2.0 * t);
        const double i_c = i_floor + (i_open - i_floor) * shape;
        m.vg_v.push_back(vg);
        m.l_j_h.push_back(kerr::josephson_inductance(i_c));
    }
    return m;
}

std::vector<GateSweepRow> synth_gate_sweep(const GateMap& map, const circuit::CircuitModel& m,
                                           std::span<const double> vg_grid,
                                           double noise_fraction,
                                           std::uint64_t seed) {
    map.validate();
    m.validate();
    if (vg_grid.size() < 2)
        throw ValidationError("synth_gate_sweep requires at least 2 gate points");
    if (noise_fraction < 0.0)
        throw ValidationError("noise fraction must be >= 0");

    Rng rng(seed);
    std::vector<GateSweepRow> rows;
    rows.reserve(vg_grid.size());
    for (double vg : vg_grid) {
        const auto st = circuit::junction_state_from_inductance(map.at(vg), m);
        GateSweepRow r;
        r.vg_v = vg;
        r.f_r_hz = st.f_r_hz;
        r.kappa_i = circuit::kappa_i_model(st, m);
        r.kappa_ex = circuit::kappa_ex_model(st, m);
        if (noise_fraction > 0.0) {
            r.kappa_i *= 1.0 + noise_fraction * rng.normal();
            r.kappa_ex *= 1.0 + noise_fraction * rng.normal();
            r.kappa_i = std::max(r.kappa_i, 1e-6 * st.f_r_hz);
            r.kappa_ex = std::max(r.kappa_ex, 1e-6 * st.f_r_hz);
        }
        rows.push_back(r);
    }
    return rows;
}

} // namespace jpakit::sim
