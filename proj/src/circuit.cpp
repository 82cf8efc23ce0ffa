#include "jpakit/circuit.hpp"
#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"
#include "jpakit/nlls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jpakit::circuit {

using constants::pi;
using constants::two_pi;

void CircuitModel::validate() const {
    if (!(f_geo_hz > 0.0) || !(f0_hz > 0.0))
        throw ValidationError("circuit model requires positive f_geo and f0");
    if (alpha_l < 0.0)
        throw ValidationError("circuit model requires alpha_l >= 0");
    if (!(r_j_ohm > 0.0))
        throw ValidationError("circuit model requires r_j > 0");
    if (c_k_f < 0.0)
        throw ValidationError("circuit model requires c_k >= 0");
}

double kl_from_fr(double f_r_hz, double f0_hz) {
    if (!(f0_hz > 0.0) || !(f_r_hz > 0.0))
        throw ValidationError("kl_from_fr requires positive frequencies");
    if (f_r_hz > f0_hz)
        throw ValidationError("dressed resonance exceeds the junction-shorted frequency");
    return 0.5 * pi * f_r_hz / f0_hz;
}

namespace {

// 2 cot(x) - r x, and the sign-equivalent form g(x) = 2 cos(x) - r x sin(x)
// which is regular at both ends of (0, pi/2].
double resonance_g(double x, double r) { return 2.0 * std::cos(x) - r * x * std::sin(x); }

} // namespace

double solve_kl(double inductance_ratio) {
    const double r = inductance_ratio;
    if (!(r >= 0.0) || !std::isfinite(r))
        throw ValidationError("solve_kl requires a finite inductance ratio >= 0");
    if (r == 0.0) return 0.5 * pi;

    double lo = 1e-9, hi = 0.5 * pi;
    // g(lo) > 0, g(hi) = -r*pi/2 < 0: bisect until the bracket is narrow,
    // then polish with Newton on h(x) = 2 cot(x) - r x.
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        if (resonance_g(mid, r) > 0.0) lo = mid; else hi = mid;
        if (hi - lo < 1e-6) break;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 50; ++i) {
        const double s = std::sin(x), c = std::cos(x);
        const double h = 2.0 * c / s - r * x;
        const double dh = -2.0 / (s * s) - r;
        double step = h / dh;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) {
            // Newton left the bracket; fall back to one bisection step.
            if (resonance_g(x, r) > 0.0) lo = x; else hi = x;
            xn = 0.5 * (lo + hi);
        }
        const double dx = std::abs(xn - x);
        x = xn;
        if (dx <= 1e-13 * x) break;
    }
    return x;
}

double flux_drop(double kl_rad) { return 2.0 * std::cos(kl_rad); }

double effective_capacitance(double kl_rad, double c_line_f) {
    const double x = 2.0 * kl_rad;
    const double sinc = (std::abs(x) < 1e-12) ? 1.0 : std::sin(x) / x;
    return c_line_f * (1.0 + sinc);
}

double junction_inductance(double kl_rad, double l_line_h) {
    if (!(kl_rad > 0.0) || kl_rad > 0.5 * pi + 1e-12)
        throw ValidationError("junction_inductance requires kl in (0, pi/2]");
    return l_line_h * 2.0 * std::cos(kl_rad) / (kl_rad * std::sin(kl_rad));
}

namespace {

JunctionState state_from_kl(double kl, const CircuitModel& m) {
    JunctionState s;
    s.kl_rad = kl;
    s.f_r_hz = kl * 2.0 * m.f0_hz / pi;
    s.l_j_h = junction_inductance(kl, m.line_inductance_h());
    s.delta_u_bar = flux_drop(kl);
    s.c_eff_f = effective_capacitance(kl, m.line_capacitance_f());
    const double w = two_pi * s.f_r_hz;
    s.l_eff_h = 1.0 / (w * w * s.c_eff_f);
    const double du2 = s.delta_u_bar * s.delta_u_bar;
    s.r_eff_ohm = du2 > 0.0 ? m.r_j_ohm / du2 : std::numeric_limits<double>::infinity();
    return s;
}

} // namespace

JunctionState junction_state_from_fr(double f_r_hz, const CircuitModel& m) {
    m.validate();
    return state_from_kl(kl_from_fr(f_r_hz, m.f0_hz), m);
}

JunctionState junction_state_from_inductance(double l_j_h, const CircuitModel& m) {
    m.validate();
    if (!(l_j_h >= 0.0))
        throw ValidationError("junction inductance must be >= 0");
    return state_from_kl(solve_kl(l_j_h / m.line_inductance_h()), m);
}

double kappa_i_model(const JunctionState& s, const CircuitModel& m) {
    const double distributed = m.alpha_l / (m.z0_ohm() * s.c_eff_f);
    const double du2 = s.delta_u_bar * s.delta_u_bar;
    const double junction = du2 / (m.r_j_ohm * s.c_eff_f);
    return distributed + junction;
}

double kappa_ex_model(const JunctionState& s, const CircuitModel& m) {
    const double w = two_pi * s.f_r_hz;
    const double z0 = m.z0_ohm();
    const double wck = w * m.c_k_f;
    if (wck == 0.0) return 0.0;
    // series coupling capacitor into a matched line, transformed to a shunt
    // resistance r_star seen by the mode
    const double r_star = (1.0 + wck * wck * z0 * z0) / (wck * wck * z0);
    return 1.0 / (r_star * s.c_eff_f);
}

namespace {

void check_rate_points(std::span<const RatePoint> pts, const CircuitModel& m) {
    if (pts.size() < 2)
        throw ValidationError("rate fit requires at least 2 points");
    for (const auto& p : pts) {
        if (!(p.f_r_hz > 0.0) || p.f_r_hz > m.f0_hz)
            throw ValidationError("rate fit: resonance samples must lie in (0, f0]");
        if (!(p.kappa > 0.0))
            throw ValidationError("rate fit: decay rates must be positive");
        if (p.sigma < 0.0)
            throw ValidationError("rate fit: sigma must be >= 0");
    }
}

bool all_weighted(std::span<const RatePoint> pts) {
    return std::all_of(pts.begin(), pts.end(), [](const RatePoint& p) { return p.sigma > 0.0; });
}

} // namespace

DissipationFit fit_dissipation(std::span<const RatePoint> points, const CircuitModel& m) {
    m.validate();
    check_rate_points(points, m);

    std::vector<JunctionState> states;
    states.reserve(points.size());
    double max_du2 = 0.0;
    for (const auto& p : points) {
        states.push_back(junction_state_from_fr(p.f_r_hz, m));
        max_du2 = std::max(max_du2, states.back().delta_u_bar * states.back().delta_u_bar);
    }

    const bool weighted = all_weighted(points);
    const bool junction_visible = max_du2 > 1e-12;

    // Parametrize alpha_l = sa^2 and 1/r_j = sq^2 to keep both nonnegative.
    // Initial guesses: distributed loss from the least-detuned point, then the
    // junction term from the most-detuned one.
    std::size_t i_min = 0, i_max = 0;
    for (std::size_t i = 1; i < states.size(); ++i) {
        if (states[i].delta_u_bar * states[i].delta_u_bar <
            states[i_min].delta_u_bar * states[i_min].delta_u_bar) i_min = i;
        if (states[i].delta_u_bar * states[i].delta_u_bar >
            states[i_max].delta_u_bar * states[i_max].delta_u_bar) i_max = i;
    }
    double alpha0 = points[i_min].kappa * m.z0_ohm() * states[i_min].c_eff_f;
    if (!(alpha0 > 0.0)) alpha0 = 1e-4;
    double q0 = 1.0 / 15e3;
    if (junction_visible) {
        const double du2 = states[i_max].delta_u_bar * states[i_max].delta_u_bar;
        const double resid = points[i_max].kappa -
                             alpha0 / (m.z0_ohm() * states[i_max].c_eff_f);
        if (resid > 0.0 && du2 > 0.0)
            q0 = resid * states[i_max].c_eff_f / du2;
    }

    auto residuals = [&](const std::vector<double>& p, std::vector<double>& r) {
        CircuitModel trial = m;
        trial.alpha_l = p[0] * p[0];
        trial.r_j_ohm = 1.0 / std::max(p[1] * p[1], 1e-300);
        for (std::size_t i = 0; i < points.size(); ++i) {
            double model = kappa_i_model(states[i], trial);
            double res = model - points[i].kappa;
            if (weighted) res /= points[i].sigma;
            r[i] = res;
        }
    };

    std::vector<double> p0 = {std::sqrt(alpha0), std::sqrt(q0)};
    auto fit = fit_least_squares(residuals, p0, points.size());

    DissipationFit out;
    const double sa = fit.params[0], sq = fit.params[1];
    out.alpha_l = sa * sa;
    out.r_j_ohm = 1.0 / std::max(sq * sq, 1e-300);
    // delta method through the square/inverse maps
    out.sigma_alpha_l = 2.0 * std::abs(sa) * fit.sigmas[0];
    out.sigma_r_j = std::abs(sq) > 0.0
        ? (2.0 / (std::abs(sq) * sq * sq)) * fit.sigmas[1]
        : std::numeric_limits<double>::infinity();
    out.residual_norm = fit.residual_norm;

    if (!junction_visible) {
        out.sigma_r_j = std::numeric_limits<double>::infinity();
        out.warnings.push_back(
            "junction resistance unidentifiable: all samples lie at the "
            "junction-shorted frequency where the junction term vanishes");
    }
    return out;
}

CouplingFit fit_coupling(std::span<const RatePoint> points, const CircuitModel& m) {
    m.validate();
    check_rate_points(points, m);

    std::vector<JunctionState> states;
    states.reserve(points.size());
    for (const auto& p : points)
        states.push_back(junction_state_from_fr(p.f_r_hz, m));

    const bool weighted = all_weighted(points);

    // Small-coupling initial guess from the first point:
    // kappa_ex ~ w^2 c_k^2 z0 / c_eff.
    const double w0 = two_pi * points[0].f_r_hz;
    double ck0 = std::sqrt(points[0].kappa * states[0].c_eff_f / (w0 * w0 * m.z0_ohm()));
    if (!(ck0 > 0.0)) ck0 = 1e-15;

    auto residuals = [&](const std::vector<double>& p, std::vector<double>& r) {
        CircuitModel trial = m;
        trial.c_k_f = p[0] * p[0];
        for (std::size_t i = 0; i < points.size(); ++i) {
            double res = kappa_ex_model(states[i], trial) - points[i].kappa;
            if (weighted) res /= points[i].sigma;
            r[i] = res;
        }
    };

    std::vector<double> p0 = {std::sqrt(ck0)};
    auto fit = fit_least_squares(residuals, p0, points.size());

    CouplingFit out;
    const double sc = fit.params[0];
    out.c_k_f = sc * sc;
    out.sigma_c_k = 2.0 * std::abs(sc) * fit.sigmas[0];
    out.residual_norm = fit.residual_norm;
    return out;
}

BandEnvelope band_evaluate(const std::function<std::vector<double>(double)>& predict,
                           double f0_lo_hz, double f0_hi_hz, std::size_t n_grid) {
    if (!(f0_lo_hz > 0.0) || !(f0_hi_hz >= f0_lo_hz))
        throw ValidationError("band_evaluate requires 0 < f0_lo <= f0_hi");
    if (n_grid < 2)
        throw ValidationError("band_evaluate requires at least 2 grid points");

    BandEnvelope env;
    env.f0_grid_hz.resize(n_grid);
    env.values.resize(n_grid);
    for (std::size_t i = 0; i < n_grid; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n_grid - 1);
        env.f0_grid_hz[i] = f0_lo_hz + t * (f0_hi_hz - f0_lo_hz);
    }

    std::size_t width = 0;
    for (std::size_t i = 0; i < n_grid; ++i) {
        try {
            env.values[i] = predict(env.f0_grid_hz[i]);
            width = std::max(width, env.values[i].size());
        } catch (const Error& e) {
            env.failures.push_back({env.f0_grid_hz[i], e.what()});
        }
    }
    if (width == 0)
        throw Error(Error::Category::numerical,
                    "band evaluation failed at every grid point");

    env.lo.assign(width, std::numeric_limits<double>::infinity());
    env.hi.assign(width, -std::numeric_limits<double>::infinity());
    for (const auto& v : env.values) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            env.lo[j] = std::min(env.lo[j], v[j]);
            env.hi[j] = std::max(env.hi[j], v[j]);
        }
    }
    return env;
}

} // namespace jpakit::circuit
