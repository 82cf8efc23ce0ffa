#include "jpakit/paramp.hpp"
#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace jpakit::paramp {

using namespace constants;

double NoiseDensity::equivalent_temperature_k() const { return w_per_hz / k_b; }

NoiseDensity NoiseDensity::from_temperature_k(double t_k) {
    if (t_k < 0.0)
        throw ValidationError("noise density requires a nonnegative temperature");
    return {k_b * t_k};
}

NoiseDensity vacuum_level(double f_hz) {
    if (!(f_hz > 0.0))
        throw ValidationError("vacuum_level requires a positive frequency");
    return {0.5 * h * f_hz};
}

namespace {

void check_ratio(double rho) {
    if (!(rho >= 0.0) || !std::isfinite(rho))
        throw ValidationError("kappa_ratio must be finite and >= 0");
}

} // namespace

double sum_rule_residual(const GainPair& g) {
    check_ratio(g.kappa_ratio);
    const double rho = g.kappa_ratio;
    const double lhs = (1.0 + rho) * std::norm(g.g_i);
    const double rhs = std::norm(g.g_s) - 1.0 + rho * std::norm(g.g_s + 1.0);
    return (lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

double idler_gain_from_sum_rule(std::complex<double> g_s, double kappa_ratio) {
    check_ratio(kappa_ratio);
    const double rho = kappa_ratio;
    const double gi2 = (std::norm(g_s) - 1.0 + rho * std::norm(g_s + 1.0)) / (1.0 + rho);
    if (gi2 < -1e-12)
        throw ValidationError("gain pair violates photon-flux conservation: "
                              "implied idler gain is negative");
    return std::max(gi2, 0.0);
}

NoiseDensity output_psd(const NoiseDensity& s_in, const GainPair& g, double f_hz) {
    check_ratio(g.kappa_ratio);
    if (s_in.w_per_hz < 0.0)
        throw ValidationError("output_psd requires a nonnegative input density");
    const double v = vacuum_level(f_hz).w_per_hz;
    const double rho = g.kappa_ratio;
    return {s_in.w_per_hz * std::norm(g.g_s) +
            v * rho * std::norm(g.g_s + 1.0) +
            v * (1.0 + rho) * std::norm(g.g_i)};
}

NoiseDensity added_noise(std::complex<double> g_s, double kappa_ratio, double f_hz) {
    check_ratio(kappa_ratio);
    const double g2 = std::norm(g_s);
    if (!(g2 > 0.0))
        throw ValidationError("added_noise requires |g_s| > 0");
    const double v = vacuum_level(f_hz).w_per_hz;
    return {v - v / g2 + 2.0 * v * kappa_ratio * std::norm(g_s + 1.0) / g2};
}

double expected_total_input_noise_k(double gain_db,
                                    double coupling_efficiency,
                                    double eta_s,
                                    double t_hemt_k,
                                    double f_hz) {
    if (!(coupling_efficiency > 0.0) || coupling_efficiency > 1.0)
        throw ValidationError("coupling efficiency must lie in (0, 1]");
    if (!(eta_s > 0.0) || eta_s > 1.0)
        throw ValidationError("eta_s must lie in (0, 1]");
    if (t_hemt_k < 0.0)
        throw ValidationError("HEMT temperature must be >= 0");

    const double g_pow = std::pow(10.0, gain_db / 10.0);
    const double rho = (1.0 - coupling_efficiency) / coupling_efficiency;
    const double v = vacuum_level(f_hz).w_per_hz;
    const double s_in = v;   // vacuum at the signal input
    const double s_add = added_noise(std::sqrt(g_pow), rho, f_hz).w_per_hz;
    const double chain = ((1.0 - eta_s) * v + k_b * t_hemt_k) / (eta_s * g_pow);
    return (s_in + s_add + chain) / k_b;
}

UncertainValue propagate_uncertainty(const std::function<double(std::span<const double>)>& f,
                                     std::span<const UncertainValue> inputs) {
    std::vector<double> x(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        x[i] = inputs[i].value;
        if (inputs[i].sigma < 0.0)
            throw ValidationError("propagate_uncertainty: sigma must be >= 0");
    }
    UncertainValue out;
    out.value = f(x);
    double var = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const double s = inputs[i].sigma;
        if (s == 0.0) continue;
        const double hstep = 1e-4 * s;
        const double x0 = x[i];
        x[i] = x0 + hstep;
        const double fp = f(x);
        x[i] = x0 - hstep;
        const double fm = f(x);
        x[i] = x0;
        const double dfdx = (fp - fm) / (2.0 * hstep);
        var += dfdx * dfdx * s * s;
    }
    out.sigma = std::sqrt(var);
    return out;
}

UncertainValue expected_noise_band(const NoiseBandInputs& in) {
    // Fold the flat calibration drift into eta_s as an extra multiplicative
    // 1-sigma term before propagating.
    const double drift_frac = std::pow(10.0, in.drift_db / 10.0) - 1.0;
    const double s_drift = in.eta_s.value * drift_frac;
    UncertainValue eta_s = in.eta_s;
    eta_s.sigma = std::sqrt(eta_s.sigma * eta_s.sigma + s_drift * s_drift);

    const UncertainValue inputs[] = {in.gain_db, in.coupling_efficiency, eta_s, in.t_hemt_k};
    auto f = [&](std::span<const double> x) {
        return expected_total_input_noise_k(x[0], x[1], x[2], x[3], in.f_hz);
    };
    return propagate_uncertainty(f, inputs);
}

} // namespace jpakit::paramp
