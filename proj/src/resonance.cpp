#include "jpakit/resonance.hpp"
#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"
#include "jpakit/nlls.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jpakit::resonance {

using constants::pi;
using constants::two_pi;

std::complex<double> reflection_model(double delta, double kappa_i, double kappa_ex) {
    if (kappa_i < 0.0 || kappa_ex < 0.0)
        throw ValidationError("reflection_model requires nonnegative rates");
    const std::complex<double> den(0.5 * (kappa_i + kappa_ex), delta);
    if (den == std::complex<double>(0.0, 0.0)) return {1.0, 0.0};
    return 1.0 - kappa_ex / den;
}

std::complex<double> Background::at(double f_hz, double f_ref_hz) const {
    const double ph = phase_rad + two_pi * delay_s * (f_hz - f_ref_hz);
    return std::polar(amplitude, ph);
}

namespace {

std::vector<double> unwrapped_phase(const std::vector<std::complex<double>>& z) {
    std::vector<double> ph(z.size());
    double offset = 0.0;
    double prev = std::arg(z[0]);
    ph[0] = prev;
    for (std::size_t i = 1; i < z.size(); ++i) {
        double a = std::arg(z[i]);
        double d = a - prev;
        while (d > pi) { d -= two_pi; }
        while (d < -pi) { d += two_pi; }
        offset += d;
        ph[i] = ph[0] + offset;
        prev = a;
    }
    return ph;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t k = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + k, v.end());
    double hi = v[k];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + k - 1, v.end());
    return 0.5 * (hi + v[k - 1]);
}

// Per-sample complex noise scale from successive differences; the median makes
// it robust against the dip itself.
double noise_scale(const std::vector<std::complex<double>>& z) {
    std::vector<double> d;
    d.reserve(z.size() - 1);
    for (std::size_t i = 1; i < z.size(); ++i)
        d.push_back(std::abs(z[i] - z[i - 1]));
    return median(std::move(d)) / 1.17741002251547;
}

struct EdgeEstimate {
    double delay_s;
    double amplitude;
    double phase_rad;   // at f_ref
};

EdgeEstimate estimate_background(const ComplexReflectionTrace& t, double f_ref) {
    const std::size_t n = t.size();
    const std::size_t m = std::max<std::size_t>(3, n / 10);
    const auto ph = unwrapped_phase(t.s11);

    auto slope = [&](std::size_t a, std::size_t b) {
        std::vector<double> x(t.f_hz.begin() + a, t.f_hz.begin() + b);
        std::vector<double> y(ph.begin() + a, ph.begin() + b);
        return fit_line(x, y).slope;
    };
    const double s_lo = slope(0, m);
    const double s_hi = slope(n - m, n);
    EdgeEstimate est;
    est.delay_s = 0.5 * (s_lo + s_hi) / two_pi;

    std::vector<double> mags;
    double cs = 0.0, sn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= m && i < n - m) continue;
        mags.push_back(std::abs(t.s11[i]));
        const double residual = ph[i] - two_pi * est.delay_s * (t.f_hz[i] - f_ref);
        cs += std::cos(residual);
        sn += std::sin(residual);
    }
    est.amplitude = median(std::move(mags));
    est.phase_rad = std::atan2(sn, cs);
    return est;
}

} // namespace

ResonatorFit fit_one_port(const ComplexReflectionTrace& trace) {
    trace.validate();
    const std::size_t n = trace.size();
    if (n < 7)
        throw ValidationError("fit_one_port requires at least 7 points for 6 parameters");

    const double f_lo = trace.f_hz.front(), f_hi = trace.f_hz.back();
    const double span = f_hi - f_lo;
    const double f_ref = 0.5 * (f_lo + f_hi);

    const double sigma = noise_scale(trace.s11);
    const auto bg0 = estimate_background(trace, f_ref);

    // De-embed the background estimate and look for a dip.
    std::vector<std::complex<double>> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = bg0.phase_rad + two_pi * bg0.delay_s * (trace.f_hz[i] - f_ref);
        z[i] = trace.s11[i] / std::polar(std::max(bg0.amplitude, 1e-300), ph);
    }

    std::size_t i_min = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(z[i]) < std::abs(z[i_min])) i_min = i;

    const double depth = bg0.amplitude * (1.0 - std::abs(z[i_min]));
    const double rejection_floor = std::max(5.0 * sigma, 1e-9 * std::max(bg0.amplitude, 1e-300));
    if (!(depth > rejection_floor))
        throw FitRejectedError("no absorption dip above the noise floor (depth " +
                               std::to_string(depth) + ", floor " +
                               std::to_string(rejection_floor) + ")");

    // Half-depth width -> kappa_tot: |gamma|^2 crosses the midpoint between
    // dip and background exactly at delta = +-kappa_tot/2.
    const double g0 = std::min(std::abs(z[i_min]), 1.0);
    const double half_level = 0.5 * (1.0 + g0 * g0);
    auto crossing = [&](int dir) -> double {
        std::size_t i = i_min;
        while (true) {
            const std::size_t j = i + dir;
            if (j >= n) return trace.f_hz[i];   // wraps for dir=-1 at 0 too
            const double a = std::norm(z[i]), b = std::norm(z[j]);
            if (b >= half_level) {
                const double t = b > a ? (half_level - a) / (b - a) : 1.0;
                return trace.f_hz[i] + t * (trace.f_hz[j] - trace.f_hz[i]);
            }
            i = j;
            if (i == 0 || i == n - 1) return trace.f_hz[i];
        }
    };
    double width = crossing(+1) - crossing(-1);
    if (!(width > 0.0)) width = span / 10.0;
    const double kappa_tot0 = two_pi * width;

    // Overcoupled iff the de-embedded trace winds around the origin.
    const auto phz = unwrapped_phase(z);
    const bool overcoupled = std::abs(phz.back() - phz.front()) > pi;
    const double kex0 = 0.5 * kappa_tot0 * (overcoupled ? 1.0 + g0 : 1.0 - g0);
    const double ki0 = std::max(kappa_tot0 - kex0, 1e-6 * kappa_tot0);

    // Dimensionless parameter vector, all O(1):
    //   x0 = (f_r - f_ref)/span, x1 = sqrt(kappa_i/(2 pi span)),
    //   x2 = sqrt(kappa_ex/(2 pi span)), x3 = amplitude, x4 = phase,
    //   x5 = delay * span.
    const double kscale = two_pi * span;
    std::vector<double> p0 = {
        (trace.f_hz[i_min] - f_ref) / span,
        std::sqrt(ki0 / kscale),
        std::sqrt(kex0 / kscale),
        bg0.amplitude,
        bg0.phase_rad,
        bg0.delay_s * span,
    };

    auto residuals = [&](const std::vector<double>& p, std::vector<double>& r) {
        const double f_r = f_ref + p[0] * span;
        const double ki = p[1] * p[1] * kscale;
        const double kex = p[2] * p[2] * kscale;
        for (std::size_t i = 0; i < n; ++i) {
            const double delta = two_pi * (trace.f_hz[i] - f_r);
            const double ph = p[4] + two_pi * (p[5] / span) * (trace.f_hz[i] - f_ref);
            const std::complex<double> model =
                std::polar(p[3], ph) * reflection_model(delta, ki, kex);
            const std::complex<double> res = model - trace.s11[i];
            r[2 * i] = res.real();
            r[2 * i + 1] = res.imag();
        }
    };

    auto fit = fit_least_squares(residuals, p0, 2 * n, 400);

    ResonatorFit out;
    out.f_ref_hz = f_ref;
    out.f_r_hz = f_ref + fit.params[0] * span;
    out.kappa_i = fit.params[1] * fit.params[1] * kscale;
    out.kappa_ex = fit.params[2] * fit.params[2] * kscale;
    out.background.amplitude = std::abs(fit.params[3]);
    out.background.phase_rad = std::remainder(fit.params[4], two_pi);
    out.background.delay_s = fit.params[5] / span;
    out.sigma_f_r_hz = fit.sigmas[0] * span;
    out.sigma_kappa_i = 2.0 * std::abs(fit.params[1]) * fit.sigmas[1] * kscale;
    out.sigma_kappa_ex = 2.0 * std::abs(fit.params[2]) * fit.sigmas[2] * kscale;
    out.residual_norm = fit.residual_norm;
    out.iterations = fit.iterations;

    if (out.f_r_hz < f_lo || out.f_r_hz > f_hi)
        throw FitRejectedError("fitted resonance left the measured span");
    if (!(out.kappa_ex > 0.0))
        throw FitRejectedError("fitted external coupling collapsed to zero");

    const double bin = span / static_cast<double>(n - 1);
    if (out.kappa_tot() / two_pi < 5.0 * bin)
        out.warnings.push_back("fewer than 5 points per linewidth; rates may be biased");
    if (out.kappa_tot() / two_pi > span)
        out.warnings.push_back("linewidth exceeds the measured span");
    return out;
}

PhaseExtraction resonance_from_phase(const ComplexReflectionTrace& trace) {
    trace.validate();
    const std::size_t n = trace.size();

    auto ph = unwrapped_phase(trace.s11);
    const std::size_t m = std::max<std::size_t>(3, n / 10);
    auto slope = [&](std::size_t a, std::size_t b) {
        std::vector<double> x(trace.f_hz.begin() + a, trace.f_hz.begin() + b);
        std::vector<double> y(ph.begin() + a, ph.begin() + b);
        return fit_line(x, y).slope;
    };
    const double delay_slope = 0.5 * (slope(0, m) + slope(n - m, n));
    for (std::size_t i = 0; i < n; ++i)
        ph[i] -= delay_slope * trace.f_hz[i];

    // |d phi / d f| on interior points
    std::vector<double> g(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i)
        g[i] = std::abs((ph[i + 1] - ph[i - 1]) / (trace.f_hz[i + 1] - trace.f_hz[i - 1]));

    const double gmax = *std::max_element(g.begin(), g.end());
    if (!(gmax > 0.0))
        throw FitRejectedError("phase is flat: no resonance feature found");

    // Group steep samples (>= half max) into regions, tolerating 2-bin gaps.
    struct Region { std::size_t a, b; };
    std::vector<Region> regions;
    const double thr = 0.5 * gmax;
    std::size_t gap = 3;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (g[i] >= thr) {
            if (!regions.empty() && i - regions.back().b <= gap)
                regions.back().b = i;
            else
                regions.push_back({i, i});
        }
    }
    if (regions.size() > 1) {
        std::vector<double> cands;
        for (const auto& reg : regions) {
            std::size_t best = reg.a;
            for (std::size_t i = reg.a; i <= reg.b; ++i)
                if (g[i] > g[best]) best = i;
            cands.push_back(trace.f_hz[best]);
        }
        throw AmbiguityError("multiple steep-phase features found (" +
                             std::to_string(regions.size()) + " candidates)", cands);
    }

    // Centroid of the (possibly tied) maximum; exact ties at a symmetric dip
    // average to the center frequency.
    double fsum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (g[i] >= gmax * (1.0 - 1e-9)) {
            fsum += trace.f_hz[i];
            ++cnt;
        }
    }

    PhaseExtraction out;
    out.f_r_hz = fsum / static_cast<double>(cnt);
    out.resolution_warning = (regions.front().b - regions.front().a + 1) < 5;
    return out;
}

LorentzianGainFit fit_lorentzian_gain(const SpectrumTrace& spec,
                                      std::span<const std::size_t> masked_bins) {
    spec.validate();
    const std::size_t n = spec.size();
    if (n < 6)
        throw ValidationError("fit_lorentzian_gain requires at least 6 bins");

    std::vector<bool> masked(n, false);
    for (std::size_t b : masked_bins) {
        if (b >= n) throw ValidationError("masked bin index out of range");
        masked[b] = true;
    }

    std::vector<std::size_t> keep;
    std::vector<double> pw(n);
    for (std::size_t i = 0; i < n; ++i) {
        pw[i] = 1e-3 * std::pow(10.0, spec.psd_dbm[i] / 10.0);
        if (!masked[i]) keep.push_back(i);
    }
    if (keep.size() < 6)
        throw ValidationError("fit_lorentzian_gain: fewer than 6 unmasked bins");

    std::vector<double> kept_pw;
    kept_pw.reserve(keep.size());
    for (std::size_t i : keep) kept_pw.push_back(pw[i]);
    const double floor0 = median(kept_pw);
    std::size_t i_pk = keep[0];
    for (std::size_t i : keep)
        if (pw[i] > pw[i_pk]) i_pk = i;

    if (!(pw[i_pk] / floor0 >= std::pow(10.0, 0.3)))
        throw LowContrastError("peak rises less than 3 dB above the floor");

    const double a0 = pw[i_pk] - floor0;
    const double c0 = spec.f_hz[i_pk];
    // half-max crossings for the initial width
    const double half = floor0 + 0.5 * a0;
    double w_lo = spec.f_hz.front(), w_hi = spec.f_hz.back();
    for (std::size_t i = i_pk; i-- > 0;)
        if (!masked[i] && pw[i] < half) { w_lo = spec.f_hz[i]; break; }
    for (std::size_t i = i_pk + 1; i < n; ++i)
        if (!masked[i] && pw[i] < half) { w_hi = spec.f_hz[i]; break; }
    double w0 = w_hi - w_lo;
    const double span = spec.f_hz.back() - spec.f_hz.front();
    if (!(w0 > 0.0)) w0 = span > 0.0 ? span / 10.0 : 1.0;

    const double f_ref = c0;
    const double fs = std::max(w0, spec.rbw_hz);
    const double ps = pw[i_pk];

    // x = {(c - f_ref)/fs, w/fs, sqrt(A/ps), sqrt(floor/ps)}
    std::vector<double> p0 = {0.0, w0 / fs, std::sqrt(a0 / ps), std::sqrt(floor0 / ps)};
    auto residuals = [&](const std::vector<double>& p, std::vector<double>& r) {
        const double c = f_ref + p[0] * fs;
        const double w = p[1] * fs;
        const double a = p[2] * p[2] * ps;
        const double fl = p[3] * p[3] * ps;
        for (std::size_t j = 0; j < keep.size(); ++j) {
            const double f = spec.f_hz[keep[j]];
            const double u = 2.0 * (f - c) / w;
            r[j] = (fl + a / (1.0 + u * u) - pw[keep[j]]) / ps;
        }
    };
    auto fit = fit_least_squares(residuals, p0, keep.size(), 400);

    LorentzianGainFit out;
    out.f_c_hz = f_ref + fit.params[0] * fs;
    out.fwhm_hz = std::abs(fit.params[1]) * fs;
    out.amp_w = fit.params[2] * fit.params[2] * ps;
    out.floor_w = fit.params[3] * fit.params[3] * ps;
    out.peak_db = 10.0 * std::log10((out.floor_w + out.amp_w) / out.floor_w);
    out.sigma_f_c_hz = fit.sigmas[0] * fs;
    out.sigma_fwhm_hz = fit.sigmas[1] * fs;
    out.residual_norm = fit.residual_norm;
    return out;
}

} // namespace jpakit::resonance
