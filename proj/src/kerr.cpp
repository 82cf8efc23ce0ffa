#include "jpakit/kerr.hpp"
#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"
#include "jpakit/nlls.hpp"

#include <algorithm>
#include <cmath>

namespace jpakit::kerr {

using namespace constants;

double josephson_inductance(double i_c_a) {
    if (!(i_c_a > 0.0))
        throw ValidationError("josephson_inductance requires a positive critical current");
    return phi0 / (two_pi * i_c_a);
}

double photon_number(double p_in_w, double f_s_hz, double kappa_ex, double kappa_i,
                     double delta) {
    if (p_in_w < 0.0)
        throw ValidationError("photon_number requires nonnegative input power");
    if (!(f_s_hz > 0.0))
        throw ValidationError("photon_number requires a positive signal frequency");
    if (!(kappa_ex > 0.0) || kappa_i < 0.0)
        throw ValidationError("photon_number requires kappa_ex > 0 and kappa_i >= 0");
    const double kt = kappa_ex + kappa_i;
    return (4.0 * kappa_ex * p_in_w / (h * f_s_hz)) / (kt * kt + 4.0 * delta * delta);
}

KerrEstimate kerr_from_sweep(std::span<const PowerSweepPoint> points,
                             double kappa_i, double kappa_ex) {
    if (points.size() < 3)
        throw ValidationError("kerr_from_sweep requires at least 3 sweep points");
    if (!(kappa_ex > 0.0) || kappa_i < 0.0)
        throw ValidationError("kerr_from_sweep requires kappa_ex > 0 and kappa_i >= 0");
    for (const auto& p : points) {
        if (p.p_in_w < 0.0 || !(p.f_signal_hz > 0.0) || !(p.f_r_hz > 0.0))
            throw ValidationError("kerr_from_sweep: malformed sweep point");
    }

    std::vector<PowerSweepPoint> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(),
              [](const PowerSweepPoint& a, const PowerSweepPoint& b) { return a.p_in_w < b.p_in_w; });

    KerrEstimate out;

    const double kt = kappa_i + kappa_ex;
    const double f_r0 = pts.front().f_r_hz;

    // Linear-response window: keep points whose resonance moved by less than a
    // quarter linewidth from the lowest-power value.
    std::size_t n_low = 0;
    for (const auto& p : pts) {
        if (std::abs(two_pi * (p.f_r_hz - f_r0)) <= 0.25 * kt) ++n_low;
        else break;
    }
    if (n_low < 3) {
        n_low = 3;
        out.warnings.push_back(
            "fewer than 3 points inside the linear-shift window; "
            "using the 3 lowest-power points");
    }

    std::vector<double> n_photon(n_low), omega(n_low), p_w(n_low), f_r(n_low);
    for (std::size_t i = 0; i < n_low; ++i) {
        const auto& p = pts[i];
        const double delta = two_pi * (p.f_signal_hz - p.f_r_hz);
        n_photon[i] = photon_number(p.p_in_w, p.f_signal_hz, kappa_ex, kappa_i, delta);
        omega[i] = two_pi * p.f_r_hz;
        p_w[i] = p.p_in_w;
        f_r[i] = p.f_r_hz;
    }

    const auto line_n = fit_line(n_photon, omega);
    const auto line_p = fit_line(p_w, f_r);

    // The resonance tracked by the shifting drive moves at K/2 per photon, so
    // the per-photon Kerr coefficient is twice the fitted slope.
    out.k = 2.0 * line_n.slope;
    out.sigma_k = 2.0 * line_n.sigma_slope;
    out.k_per_power = line_p.slope;
    out.sigma_k_per_power = line_p.sigma_slope;
    out.points_used = n_low;

    // Flag saturation: a shift reversal beyond the fit noise anywhere in the
    // full sweep means the highest powers left the cubic regime.
    double sigma_noise = n_low > 2 ? std::sqrt(line_p.rss / static_cast<double>(n_low - 2)) : 0.0;
    sigma_noise = std::max(sigma_noise, 1e-9 * f_r0);
    const double trend = pts.back().f_r_hz - pts.front().f_r_hz;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double d = pts[i].f_r_hz - pts[i - 1].f_r_hz;
        if (d * trend < 0.0 && std::abs(d) > 5.0 * sigma_noise) {
            out.warnings.push_back(
                "resonance shift is non-monotone in power beyond the noise; "
                "highest powers may be outside the cubic regime");
            break;
        }
    }
    return out;
}

double kerr_predict(const circuit::JunctionState& s) {
    if (!(s.c_eff_f > 0.0) || !(s.l_j_h > 0.0))
        throw ValidationError("kerr_predict requires c_eff > 0 and l_j > 0");
    const double du = s.delta_u_bar;
    const double du4 = du * du * du * du;
    return -(e * e / (2.0 * s.c_eff_f)) * (s.l_eff_h / s.l_j_h) * du4 / hbar;
}

double kerr_design(double i_c_a, const circuit::CircuitModel& m) {
    const double l_j = josephson_inductance(i_c_a);
    return kerr_predict(circuit::junction_state_from_inductance(l_j, m));
}

} // namespace jpakit::kerr
