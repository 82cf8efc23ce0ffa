#include "jpakit/cli.hpp"

#include "jpakit/chain.hpp"
#include "jpakit/circuit.hpp"
#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"
#include "jpakit/io.hpp"
#include "jpakit/kerr.hpp"
#include "jpakit/paramp.hpp"
#include "jpakit/plot.hpp"
#include "jpakit/resonance.hpp"
#include "jpakit/simulator.hpp"
#include "jpakit/version.hpp"

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace jpakit::cli {

using constants::two_pi;
using io::ResultRecord;

namespace {

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Print scalar outputs as "name = value unit [+- sigma]" and persist the
// record when a path was given.
void emit_record(const ResultRecord& rec, const std::string& out_path, std::ostream& out) {
    for (const auto& [name, entry] : rec.outputs.items()) {
        if (!entry.contains("value") || !entry["value"].is_number()) continue;
        out << name << " = " << fmt_num(entry["value"].get<double>());
        const std::string unit = entry.value("unit", "");
        if (!unit.empty()) out << " " << unit;
        if (entry.contains("sigma"))
            out << " +- " << fmt_num(entry["sigma"].get<double>());
        out << "\n";
    }
    for (const auto& w : rec.warnings) out << "warning: " << w << "\n";
    if (!out_path.empty()) io::write_file(out_path, rec.to_text());
}

void write_plot(const ResultRecord& rec, const plot::PlotSpec& spec, const std::string& path) {
    io::write_file(path, plot::emit_svg(rec, spec));
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo))
        throw ValidationError("grid requires at least 2 points and hi > lo");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

// ---- fit-resonance ----

struct FitResonanceOpts {
    std::string in, format = "auto", out, plot_path;
};

void run_fit_resonance(const FitResonanceOpts& o, std::ostream& out) {
    const auto trace = io::load_reflection(o.in, o.format);
    const auto fit = resonance::fit_one_port(trace);

    ResultRecord rec;
    rec.command = "fit-resonance";
    rec.inputs["in"] = o.in;
    rec.inputs["format"] = o.format;
    rec.inputs["in_digest"] = io::digest_string(io::read_file(o.in));
    rec.warnings = fit.warnings;

    rec.add_scalar("f_r_Hz", fit.f_r_hz, "Hz", fit.sigma_f_r_hz);
    rec.add_scalar("kappa_i_Hz", fit.kappa_i / two_pi, "Hz", fit.sigma_kappa_i / two_pi);
    rec.add_scalar("kappa_ex_Hz", fit.kappa_ex / two_pi, "Hz", fit.sigma_kappa_ex / two_pi);
    rec.add_scalar("kappa_tot_Hz", fit.kappa_tot() / two_pi, "Hz");
    rec.add_scalar("coupling_efficiency", fit.coupling_efficiency(), "");
    rec.add_scalar("background_amplitude", fit.background.amplitude, "");
    rec.add_scalar("background_phase_rad", fit.background.phase_rad, "rad");
    rec.add_scalar("background_delay_s", fit.background.delay_s, "s");
    rec.add_scalar("residual_norm", fit.residual_norm, "");

    std::vector<double> mag(trace.size()), magfit(trace.size());
    std::vector<double> ph(trace.size()), phfit(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double f = trace.f_hz[i];
        const auto model = fit.background.at(f, fit.f_ref_hz) *
            resonance::reflection_model(two_pi * (f - fit.f_r_hz), fit.kappa_i, fit.kappa_ex);
        mag[i] = std::abs(trace.s11[i]);
        magfit[i] = std::abs(model);
        ph[i] = std::arg(trace.s11[i]);
        phfit[i] = std::arg(model);
    }
    rec.add_array("f_Hz", trace.f_hz, "Hz");
    rec.add_array("s11_mag_data", mag, "");
    rec.add_array("s11_mag_fit", magfit, "");
    rec.add_array("s11_phase_data_rad", ph, "rad");
    rec.add_array("s11_phase_fit_rad", phfit, "rad");

    emit_record(rec, o.out, out);
    if (!o.plot_path.empty()) {
        plot::PlotSpec ps;
        ps.kind = plot::PlotSpec::Kind::trace;
        ps.x = "f_Hz";
        ps.y = {"s11_mag_data", "s11_mag_fit"};
        ps.title = "one-port reflection fit";
        write_plot(rec, ps, o.plot_path);
    }
}

// ---- fit-circuit ----

struct FitCircuitOpts {
    std::string in, out, plot_path;
    double f0 = 0.0, f_geo = 0.0;
    double f0_lo = 0.0, f0_hi = 0.0;
    std::size_t f0_steps = 16;
};

void run_fit_circuit(const FitCircuitOpts& o, std::ostream& out) {
    const auto data = io::gate_sweep_from_csv(io::read_file(o.in));
    std::vector<circuit::RatePoint> ki_pts(data.f_r_hz.size()), kex_pts(data.f_r_hz.size());
    for (std::size_t i = 0; i < data.f_r_hz.size(); ++i) {
        ki_pts[i] = {data.f_r_hz[i], data.kappa_i[i], 0.0};
        kex_pts[i] = {data.f_r_hz[i], data.kappa_ex[i], 0.0};
    }

    circuit::CircuitModel base;
    base.f0_hz = o.f0;
    base.f_geo_hz = o.f_geo;
    base.validate();

    const auto dis = circuit::fit_dissipation(ki_pts, base);
    const auto cpl = circuit::fit_coupling(kex_pts, base);

    ResultRecord rec;
    rec.command = "fit-circuit";
    rec.inputs["in"] = o.in;
    rec.inputs["in_digest"] = io::digest_string(io::read_file(o.in));
    rec.inputs["f0_Hz"] = o.f0;
    rec.inputs["f_geo_Hz"] = o.f_geo;
    rec.warnings = dis.warnings;
    for (const auto& w : cpl.warnings) rec.warnings.push_back(w);

    rec.add_scalar("alpha_l", dis.alpha_l, "", dis.sigma_alpha_l);
    rec.add_scalar("r_j_ohm", dis.r_j_ohm, "ohm", dis.sigma_r_j);
    rec.add_scalar("c_k_F", cpl.c_k_f, "F", cpl.sigma_c_k);
    rec.add_scalar("dissipation_residual_norm", dis.residual_norm, "");
    rec.add_scalar("coupling_residual_norm", cpl.residual_norm, "");

    if (o.f0_lo > 0.0 && o.f0_hi > o.f0_lo) {
        // Refit over the f0 band: parameter systematics plus predicted-rate
        // envelopes on a common resonance grid.
        auto fit_at = [&](double f0x) {
            circuit::CircuitModel m = base;
            m.f0_hz = f0x;
            const auto d = circuit::fit_dissipation(ki_pts, m);
            const auto c = circuit::fit_coupling(kex_pts, m);
            return std::array<double, 3>{d.alpha_l, d.r_j_ohm, c.c_k_f};
        };

        const auto env = circuit::band_evaluate(
            [&](double f0x) {
                const auto p = fit_at(f0x);
                return std::vector<double>{p[0], p[1], p[2]};
            },
            o.f0_lo, o.f0_hi, o.f0_steps);

        rec.add_scalar("alpha_l_band_lo", env.lo[0], "");
        rec.add_scalar("alpha_l_band_hi", env.hi[0], "");
        rec.add_scalar("r_j_band_lo_ohm", env.lo[1], "ohm");
        rec.add_scalar("r_j_band_hi_ohm", env.hi[1], "ohm");
        rec.add_scalar("c_k_band_lo_F", env.lo[2], "F");
        rec.add_scalar("c_k_band_hi_F", env.hi[2], "F");
        rec.add_scalar("band_failures", static_cast<double>(env.failures.size()), "");
        for (const auto& f : env.failures)
            rec.warnings.push_back("band point f0 = " + fmt_num(f.f0_hz) + " Hz failed: " + f.message);

        const double fr_min = *std::min_element(data.f_r_hz.begin(), data.f_r_hz.end());
        const double fr_max = std::min(*std::max_element(data.f_r_hz.begin(), data.f_r_hz.end()),
                                       0.999 * o.f0_lo);
        if (fr_max > fr_min) {
            const auto fr_grid = linspace(fr_min, fr_max, 41);
            const auto kenv = circuit::band_evaluate(
                [&](double f0x) {
                    circuit::CircuitModel m = base;
                    m.f0_hz = f0x;
                    const auto p = fit_at(f0x);
                    m.alpha_l = p[0];
                    m.r_j_ohm = p[1];
                    m.c_k_f = p[2];
                    std::vector<double> v;
                    v.reserve(fr_grid.size() * 2);
                    for (double fr : fr_grid) {
                        const auto st = circuit::junction_state_from_fr(fr, m);
                        v.push_back(circuit::kappa_i_model(st, m) / two_pi);
                    }
                    for (double fr : fr_grid) {
                        const auto st = circuit::junction_state_from_fr(fr, m);
                        v.push_back(circuit::kappa_ex_model(st, m) / two_pi);
                    }
                    return v;
                },
                o.f0_lo, o.f0_hi, o.f0_steps);

            const std::size_t ng = fr_grid.size();
            rec.add_array("fr_grid_Hz", fr_grid, "Hz");
            rec.add_array("kappa_i_lo_Hz", std::span(kenv.lo).subspan(0, ng), "Hz");
            rec.add_array("kappa_i_hi_Hz", std::span(kenv.hi).subspan(0, ng), "Hz");
            rec.add_array("kappa_ex_lo_Hz", std::span(kenv.lo).subspan(ng, ng), "Hz");
            rec.add_array("kappa_ex_hi_Hz", std::span(kenv.hi).subspan(ng, ng), "Hz");
        }
    }

    emit_record(rec, o.out, out);
    if (!o.plot_path.empty()) {
        if (!rec.outputs.contains("fr_grid_Hz"))
            throw UsageError("--plot for fit-circuit requires an f0 band (--f0-lo/--f0-hi)");
        plot::PlotSpec ps;
        ps.kind = plot::PlotSpec::Kind::envelope;
        ps.x = "fr_grid_Hz";
        ps.y_lo = "kappa_i_lo_Hz";
        ps.y_hi = "kappa_i_hi_Hz";
        ps.title = "internal loss envelope over the f0 band";
        write_plot(rec, ps, o.plot_path);
    }
}

// ---- kerr-extract ----

struct KerrExtractOpts {
    std::string in, out;
    double kappa_i_hz = 0.0, kappa_ex_hz = 0.0;
};

void run_kerr_extract(const KerrExtractOpts& o, std::ostream& out) {
    const auto pts = io::power_sweep_from_csv(io::read_file(o.in));
    const auto est = kerr::kerr_from_sweep(pts, two_pi * o.kappa_i_hz, two_pi * o.kappa_ex_hz);

    ResultRecord rec;
    rec.command = "kerr-extract";
    rec.inputs["in"] = o.in;
    rec.inputs["in_digest"] = io::digest_string(io::read_file(o.in));
    rec.inputs["kappa_i_Hz"] = o.kappa_i_hz;
    rec.inputs["kappa_ex_Hz"] = o.kappa_ex_hz;
    rec.warnings = est.warnings;

    rec.add_scalar("kerr_s^-1", est.k, "s^-1", est.sigma_k);
    rec.add_scalar("kerr_Hz", est.k / two_pi, "Hz", est.sigma_k / two_pi);
    rec.add_scalar("kerr_per_power_Hz_per_W", est.k_per_power, "Hz/W", est.sigma_k_per_power);
    rec.add_scalar("kerr_per_power_MHz_per_fW", est.k_per_power * 1e-21, "MHz/fW");
    rec.add_scalar("points_used", static_cast<double>(est.points_used), "");
    emit_record(rec, o.out, out);
}

// ---- kerr-predict ----

struct KerrPredictOpts {
    std::string out;
    double f0 = 0.0, f_geo = 0.0;
    double fr = 0.0, lj = 0.0, ic = 0.0;
};

void run_kerr_predict(const KerrPredictOpts& o, std::ostream& out) {
    circuit::CircuitModel m;
    m.f0_hz = o.f0;
    m.f_geo_hz = o.f_geo;
    m.validate();

    const int given = (o.fr > 0.0) + (o.lj > 0.0) + (o.ic > 0.0);
    if (given != 1)
        throw UsageError("pass exactly one of --fr, --lj, --ic");

    circuit::JunctionState st;
    if (o.fr > 0.0) st = circuit::junction_state_from_fr(o.fr, m);
    else if (o.lj > 0.0) st = circuit::junction_state_from_inductance(o.lj, m);
    else st = circuit::junction_state_from_inductance(kerr::josephson_inductance(o.ic), m);

    const double k = kerr::kerr_predict(st);

    ResultRecord rec;
    rec.command = "kerr-predict";
    rec.inputs["f0_Hz"] = o.f0;
    rec.inputs["f_geo_Hz"] = o.f_geo;
    if (o.fr > 0.0) rec.inputs["fr_Hz"] = o.fr;
    if (o.lj > 0.0) rec.inputs["lj_H"] = o.lj;
    if (o.ic > 0.0) rec.inputs["ic_A"] = o.ic;

    rec.add_scalar("kerr_s^-1", k, "s^-1");
    rec.add_scalar("kerr_Hz", k / two_pi, "Hz");
    rec.add_scalar("f_r_Hz", st.f_r_hz, "Hz");
    rec.add_scalar("l_j_H", st.l_j_h, "H");
    rec.add_scalar("kl_rad", st.kl_rad, "rad");
    rec.add_scalar("delta_u_bar", st.delta_u_bar, "");
    rec.add_scalar("c_eff_F", st.c_eff_f, "F");
    rec.add_scalar("l_eff_H", st.l_eff_h, "H");
    emit_record(rec, o.out, out);
}

// ---- gain-map ----

struct GainMapOpts {
    std::string out, plot_path;
    double fr = 0.0, kappa_i_hz = 0.0, kappa_ex_hz = 0.0, kerr_hz = 0.0;
    double pump_f_lo = 0.0, pump_f_hi = 0.0;
    double pump_p_lo_dbm = 0.0, pump_p_hi_dbm = 0.0;
    std::size_t nx = 41, ny = 41;
    double delta_hz = 0.0;
};

void run_gain_map(const GainMapOpts& o, std::ostream& out) {
    sim::KerrCavity cav;
    cav.f_r_hz = o.fr;
    cav.kappa_i = two_pi * o.kappa_i_hz;
    cav.kappa_ex = two_pi * o.kappa_ex_hz;
    cav.k = two_pi * o.kerr_hz;
    cav.validate();

    const auto f_grid = linspace(o.pump_f_lo, o.pump_f_hi, o.nx);
    const auto p_grid = linspace(o.pump_p_lo_dbm, o.pump_p_hi_dbm, o.ny);

    std::vector<double> gain(o.nx * o.ny, std::numeric_limits<double>::quiet_NaN());
    double best = -std::numeric_limits<double>::infinity();
    double best_f = o.pump_f_lo, best_p = o.pump_p_lo_dbm;
    std::size_t unstable = 0;
    for (std::size_t iy = 0; iy < o.ny; ++iy) {
        for (std::size_t ix = 0; ix < o.nx; ++ix) {
            sim::PumpDrive d{f_grid[ix], io::dbm_to_w(p_grid[iy])};
            try {
                const auto g = sim::gain_pair(cav, d, two_pi * o.delta_hz);
                const double gdb = 10.0 * std::log10(std::norm(g.g_s));
                gain[iy * o.nx + ix] = gdb;
                if (gdb > best) { best = gdb; best_f = f_grid[ix]; best_p = p_grid[iy]; }
            } catch (const StabilityError&) {
                ++unstable;
            }
        }
    }

    ResultRecord rec;
    rec.command = "gain-map";
    rec.inputs["fr_Hz"] = o.fr;
    rec.inputs["kappa_i_Hz"] = o.kappa_i_hz;
    rec.inputs["kappa_ex_Hz"] = o.kappa_ex_hz;
    rec.inputs["kerr_Hz"] = o.kerr_hz;
    rec.inputs["delta_Hz"] = o.delta_hz;

    rec.add_array("pump_f_Hz", f_grid, "Hz");
    rec.add_array("pump_p_dBm", p_grid, "dBm");
    rec.add_array("gain_dB", gain, "dB");
    rec.add_scalar("max_gain_dB", best, "dB");
    rec.add_scalar("max_gain_pump_f_Hz", best_f, "Hz");
    rec.add_scalar("max_gain_pump_p_dBm", best_p, "dBm");
    rec.add_scalar("unstable_points", static_cast<double>(unstable), "");
    emit_record(rec, o.out, out);

    if (!o.plot_path.empty()) {
        plot::PlotSpec ps;
        ps.kind = plot::PlotSpec::Kind::map;
        ps.x = "pump_f_Hz";
        ps.y_axis = "pump_p_dBm";
        ps.z = "gain_dB";
        ps.title = "signal gain";
        write_plot(rec, ps, o.plot_path);
    }
}

// ---- calibrate-hemt ----

struct CalibrateHemtOpts {
    std::string in, out;
    double f = 0.0;
};

void run_calibrate_hemt(const CalibrateHemtOpts& o, std::ostream& out) {
    const auto pts = io::hemt_points_from_csv(io::read_file(o.in));
    const auto cal = chain::fit_hemt_calibration(pts, o.f);

    ResultRecord rec;
    rec.command = "calibrate-hemt";
    rec.inputs["in"] = o.in;
    rec.inputs["in_digest"] = io::digest_string(io::read_file(o.in));
    rec.inputs["f_Hz"] = o.f;
    rec.add_scalar("t_hemt_K", cal.t_hemt_k, "K", cal.sigma_t_hemt_k);
    rec.add_scalar("scale", cal.scale, "", cal.sigma_scale);
    emit_record(rec, o.out, out);
}

// ---- estimate-attenuation ----

struct EstimateAttenuationOpts {
    std::string out;
    double signal_dbm = 0.0, margin_db = 0.0, t_noise = 0.0, rbw = 0.0;
    double cavity_loss_db = 0.0;
};

void run_estimate_attenuation(const EstimateAttenuationOpts& o, std::ostream& out) {
    const double floor = chain::noise_floor_dbm(o.t_noise, o.rbw);
    const double att = chain::estimate_attenuation_db(o.signal_dbm, o.margin_db,
                                                      o.t_noise, o.rbw, o.cavity_loss_db);
    ResultRecord rec;
    rec.command = "estimate-attenuation";
    rec.inputs["signal_dBm"] = o.signal_dbm;
    rec.inputs["margin_dB"] = o.margin_db;
    rec.inputs["t_noise_K"] = o.t_noise;
    rec.inputs["rbw_Hz"] = o.rbw;
    rec.inputs["cavity_loss_dB"] = o.cavity_loss_db;
    rec.add_scalar("noise_floor_dBm", floor, "dBm");
    rec.add_scalar("attenuation_dB", att, "dB");
    emit_record(rec, o.out, out);
}

// ---- refer-noise ----

struct ReferNoiseOpts {
    std::string out;
    double s_meas_k = 0.0, t_hemt = 0.0, f = 0.0;
    double eta_s = -1.0, eta_c_off = -1.0;
    double gain_db = std::numeric_limits<double>::quiet_NaN();
};

void run_refer_noise(const ReferNoiseOpts& o, std::ostream& out) {
    const bool have_off = o.eta_c_off >= 0.0;
    const bool have_gain = std::isfinite(o.gain_db);
    if (have_off == have_gain)
        throw UsageError("pass exactly one of --eta-c-off (pump off) or --gain-db (pump on)");

    chain::NoiseChain ch;
    ch.eta_s = o.eta_s;
    ch.t_hemt_k = o.t_hemt;
    double eta;
    if (have_off) {
        ch.eta_c_off = o.eta_c_off;
        eta = chain::eta_off(ch);
    } else {
        ch.gain_db = o.gain_db;
        eta = chain::eta_on(ch);
    }
    const auto ref = chain::refer_to_input(o.s_meas_k, eta, o.t_hemt, o.f);

    ResultRecord rec;
    rec.command = "refer-noise";
    rec.inputs["s_meas_K"] = o.s_meas_k;
    rec.inputs["t_hemt_K"] = o.t_hemt;
    rec.inputs["f_Hz"] = o.f;
    rec.inputs["eta_s"] = o.eta_s;
    if (have_off) rec.inputs["eta_c_off"] = o.eta_c_off;
    if (have_gain) rec.inputs["gain_dB"] = o.gain_db;
    rec.add_scalar("eta", eta, "");
    rec.add_scalar("total_input_referred_K", ref.total_k, "K");
    rec.add_scalar("input_term_K", ref.input_k, "K");
    emit_record(rec, o.out, out);
}

// ---- delta-snr ----

struct DeltaSnrOpts {
    std::string on, off, out;
    double pilot_f = 0.0;
};

void run_delta_snr(const DeltaSnrOpts& o, std::ostream& out) {
    const auto spec_on = io::spectrum_from_csv(io::read_file(o.on));
    const auto spec_off = io::spectrum_from_csv(io::read_file(o.off));
    const double snr_on = chain::pilot_snr_db(spec_on, o.pilot_f);
    const double snr_off = chain::pilot_snr_db(spec_off, o.pilot_f);

    ResultRecord rec;
    rec.command = "delta-snr";
    rec.inputs["on"] = o.on;
    rec.inputs["off"] = o.off;
    rec.inputs["on_digest"] = io::digest_string(io::read_file(o.on));
    rec.inputs["off_digest"] = io::digest_string(io::read_file(o.off));
    rec.inputs["pilot_f_Hz"] = o.pilot_f;
    rec.add_scalar("snr_on_dB", snr_on, "dB");
    rec.add_scalar("snr_off_dB", snr_off, "dB");
    rec.add_scalar("delta_snr_dB", snr_on - snr_off, "dB");
    emit_record(rec, o.out, out);
}

// ---- simulate ----

struct SimReflectionOpts {
    std::string out_csv, out;
    double fr = 0.0, kappa_i_hz = 0.0, kappa_ex_hz = 0.0, kerr_hz = 0.0;
    double power_dbm = -120.0, f_lo = 0.0, f_hi = 0.0, noise = 0.0;
    std::size_t points = 401;
    std::uint64_t seed = 0;
};

void run_sim_reflection(const SimReflectionOpts& o, std::ostream& out) {
    sim::KerrCavity cav;
    cav.f_r_hz = o.fr;
    cav.kappa_i = two_pi * o.kappa_i_hz;
    cav.kappa_ex = two_pi * o.kappa_ex_hz;
    cav.k = two_pi * o.kerr_hz;

    const auto grid = linspace(o.f_lo, o.f_hi, o.points);
    const auto trace = sim::synth_reflection(cav, io::dbm_to_w(o.power_dbm), grid,
                                             o.noise, o.seed);
    const std::string csv = io::reflection_to_csv(trace);
    io::write_file(o.out_csv, csv);

    ResultRecord rec;
    rec.command = "simulate reflection";
    rec.has_seed = true;
    rec.seed = o.seed;
    rec.inputs["fr_Hz"] = o.fr;
    rec.inputs["kappa_i_Hz"] = o.kappa_i_hz;
    rec.inputs["kappa_ex_Hz"] = o.kappa_ex_hz;
    rec.inputs["kerr_Hz"] = o.kerr_hz;
    rec.inputs["power_dBm"] = o.power_dbm;
    rec.inputs["noise"] = o.noise;
    rec.inputs["out_csv"] = o.out_csv;
    rec.add_scalar("points", static_cast<double>(trace.size()), "");
    rec.outputs["csv_digest"] = {{"text", io::digest_string(csv)}};
    emit_record(rec, o.out, out);
    out << "wrote " << o.out_csv << "\n";
}

struct SimSpectrumOpts {
    std::string out_on, out_off, out;
    double fr = 0.0, kappa_i_hz = 0.0, kappa_ex_hz = 0.0, kerr_hz = 0.0;
    double pump_f = 0.0, pump_dbm = 0.0, pilot_f = 0.0, pilot_dbm = 0.0;
    double rbw = 0.0, f_lo = 0.0, f_hi = 0.0;
    double eta_s = 1.0, eta_c_off = 1.0, t_hemt = 0.0, leak = 1e-6;
    std::uint64_t seed = 0;
};

void run_sim_spectrum(const SimSpectrumOpts& o, std::ostream& out) {
    sim::KerrCavity cav;
    cav.f_r_hz = o.fr;
    cav.kappa_i = two_pi * o.kappa_i_hz;
    cav.kappa_ex = two_pi * o.kappa_ex_hz;
    cav.k = two_pi * o.kerr_hz;
    sim::PumpDrive drive{o.pump_f, io::dbm_to_w(o.pump_dbm)};
    chain::NoiseChain ch;
    ch.eta_s = o.eta_s;
    ch.eta_c_off = o.eta_c_off;
    ch.t_hemt_k = o.t_hemt;

    const auto pair = sim::synth_spectrum(cav, drive, ch, o.pilot_f,
                                          io::dbm_to_w(o.pilot_dbm), o.rbw,
                                          o.f_lo, o.f_hi, o.seed, o.leak);
    const std::string csv_on = io::spectrum_to_csv(pair.pump_on);
    const std::string csv_off = io::spectrum_to_csv(pair.pump_off);
    io::write_file(o.out_on, csv_on);
    io::write_file(o.out_off, csv_off);

    ResultRecord rec;
    rec.command = "simulate spectrum";
    rec.has_seed = true;
    rec.seed = o.seed;
    rec.inputs["fr_Hz"] = o.fr;
    rec.inputs["kappa_i_Hz"] = o.kappa_i_hz;
    rec.inputs["kappa_ex_Hz"] = o.kappa_ex_hz;
    rec.inputs["kerr_Hz"] = o.kerr_hz;
    rec.inputs["pump_f_Hz"] = o.pump_f;
    rec.inputs["pump_dBm"] = o.pump_dbm;
    rec.inputs["pilot_f_Hz"] = o.pilot_f;
    rec.inputs["pilot_dBm"] = o.pilot_dbm;
    rec.inputs["rbw_Hz"] = o.rbw;
    rec.inputs["eta_s"] = o.eta_s;
    rec.inputs["eta_c_off"] = o.eta_c_off;
    rec.inputs["t_hemt_K"] = o.t_hemt;
    rec.add_scalar("bins", static_cast<double>(pair.pump_on.size()), "");
    rec.outputs["csv_on_digest"] = {{"text", io::digest_string(csv_on)}};
    rec.outputs["csv_off_digest"] = {{"text", io::digest_string(csv_off)}};
    emit_record(rec, o.out, out);
    out << "wrote " << o.out_on << " and " << o.out_off << "\n";
}

struct SimGateSweepOpts {
    std::string out_csv, out, map_csv;
    double f0 = 0.0, f_geo = 0.0, alpha_l = 0.0, rj = 15e3, ck = 0.0;
    double vg_lo = -2.5, vg_hi = 0.0, noise_frac = 0.0;
    std::size_t points = 26;
    std::uint64_t seed = 0;
};

void run_sim_gate_sweep(const SimGateSweepOpts& o, std::ostream& out) {
    circuit::CircuitModel m;
    m.f0_hz = o.f0;
    m.f_geo_hz = o.f_geo;
    m.alpha_l = o.alpha_l;
    m.r_j_ohm = o.rj;
    m.c_k_f = o.ck;
    m.validate();

    sim::GateMap map;
    if (o.map_csv.empty()) {
        map = sim::GateMap::default_map();
    } else {
        const auto t = io::parse_csv(io::read_file(o.map_csv));
        static constexpr std::string_view cols[] = {"Vg_V", "Lj_H"};
        io::require_columns(t, cols, "gate map");
        map.vg_v = t.column("Vg_V");
        map.l_j_h = t.column("Lj_H");
    }

    const auto grid = linspace(o.vg_lo, o.vg_hi, o.points);
    const auto rows = sim::synth_gate_sweep(map, m, grid, o.noise_frac, o.seed);
    const std::string csv = io::gate_sweep_to_csv(rows);
    io::write_file(o.out_csv, csv);

    ResultRecord rec;
    rec.command = "simulate gate-sweep";
    rec.has_seed = true;
    rec.seed = o.seed;
    rec.inputs["f0_Hz"] = o.f0;
    rec.inputs["f_geo_Hz"] = o.f_geo;
    rec.inputs["alpha_l"] = o.alpha_l;
    rec.inputs["r_j_ohm"] = o.rj;
    rec.inputs["c_k_F"] = o.ck;
    rec.inputs["noise_fraction"] = o.noise_frac;
    rec.inputs["out_csv"] = o.out_csv;
    rec.add_scalar("rows", static_cast<double>(rows.size()), "");
    rec.outputs["csv_digest"] = {{"text", io::digest_string(csv)}};
    emit_record(rec, o.out, out);
    out << "wrote " << o.out_csv << "\n";
}

// ---- plot ----

struct PlotOpts {
    std::string record, kind = "trace", out, title;
    std::string x, y_lo, y_hi, y_axis, z;
    std::vector<std::string> y;
};

void run_plot(const PlotOpts& o, std::ostream& out) {
    const auto rec = io::load_record(o.record);
    plot::PlotSpec ps;
    if (o.kind == "trace") ps.kind = plot::PlotSpec::Kind::trace;
    else if (o.kind == "envelope") ps.kind = plot::PlotSpec::Kind::envelope;
    else if (o.kind == "map") ps.kind = plot::PlotSpec::Kind::map;
    else throw UsageError("unknown plot kind '" + o.kind + "' (trace|envelope|map)");
    ps.x = o.x;
    ps.y = o.y;
    ps.y_lo = o.y_lo;
    ps.y_hi = o.y_hi;
    ps.y_axis = o.y_axis;
    ps.z = o.z;
    ps.title = o.title;
    io::write_file(o.out, plot::emit_svg(rec, ps));
    out << "wrote " << o.out << "\n";
}

void print_error(std::ostream& err, const char* category, const std::string& message) {
    nlohmann::json j;
    j["error"] = {{"category", category}, {"message", message}};
    err << j.dump() << "\n";
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"microwave resonator and parametric amplifier toolkit"};
    app.set_version_flag("--version", std::string("jpakit ") + jpakit::version);
    app.set_config("--config", "", "INI config file; one section per subcommand");
    app.require_subcommand(0, 1);

    FitResonanceOpts fr_opts;
    auto* c_fr = app.add_subcommand("fit-resonance", "fit a one-port reflection trace");
    c_fr->add_option("--in", fr_opts.in, "input trace (.s1p or .csv)")->required();
    c_fr->add_option("--format", fr_opts.format, "auto|touchstone|csv");
    c_fr->add_option("--out", fr_opts.out, "write the result record (JSON)");
    c_fr->add_option("--plot", fr_opts.plot_path, "write a magnitude plot (SVG)");

    FitCircuitOpts fc_opts;
    auto* c_fc = app.add_subcommand("fit-circuit", "fit loss and coupling elements to a gate sweep");
    c_fc->add_option("--in", fc_opts.in, "gate sweep CSV")->required();
    c_fc->add_option("--f0", fc_opts.f0, "junction-shorted resonance, Hz")->required();
    c_fc->add_option("--f-geo", fc_opts.f_geo, "geometric scale frequency, Hz")->required();
    c_fc->add_option("--f0-lo", fc_opts.f0_lo, "systematic band lower edge, Hz");
    c_fc->add_option("--f0-hi", fc_opts.f0_hi, "systematic band upper edge, Hz");
    c_fc->add_option("--f0-steps", fc_opts.f0_steps, "band grid points");
    c_fc->add_option("--out", fc_opts.out, "write the result record (JSON)");
    c_fc->add_option("--plot", fc_opts.plot_path, "write the loss envelope plot (SVG)");

    KerrExtractOpts ke_opts;
    auto* c_ke = app.add_subcommand("kerr-extract", "Kerr coefficient from a power sweep");
    c_ke->add_option("--in", ke_opts.in, "power sweep CSV (Pin_dBm,fr_Hz)")->required();
    c_ke->add_option("--kappa-i", ke_opts.kappa_i_hz, "internal linewidth, Hz")->required();
    c_ke->add_option("--kappa-ex", ke_opts.kappa_ex_hz, "external linewidth, Hz")->required();
    c_ke->add_option("--out", ke_opts.out, "write the result record (JSON)");

    KerrPredictOpts kp_opts;
    auto* c_kp = app.add_subcommand("kerr-predict", "Kerr coefficient from the circuit model");
    c_kp->add_option("--f0", kp_opts.f0, "junction-shorted resonance, Hz")->required();
    c_kp->add_option("--f-geo", kp_opts.f_geo, "geometric scale frequency, Hz")->required();
    c_kp->add_option("--fr", kp_opts.fr, "dressed resonance, Hz");
    c_kp->add_option("--lj", kp_opts.lj, "junction inductance, H");
    c_kp->add_option("--ic", kp_opts.ic, "junction critical current, A");
    c_kp->add_option("--out", kp_opts.out, "write the result record (JSON)");

    GainMapOpts gm_opts;
    auto* c_gm = app.add_subcommand("gain-map", "signal gain over a pump power/frequency grid");
    c_gm->add_option("--fr", gm_opts.fr, "resonance, Hz")->required();
    c_gm->add_option("--kappa-i", gm_opts.kappa_i_hz, "internal linewidth, Hz")->required();
    c_gm->add_option("--kappa-ex", gm_opts.kappa_ex_hz, "external linewidth, Hz")->required();
    c_gm->add_option("--kerr", gm_opts.kerr_hz, "Kerr per photon, Hz")->required();
    c_gm->add_option("--pump-f-lo", gm_opts.pump_f_lo, "pump grid start, Hz")->required();
    c_gm->add_option("--pump-f-hi", gm_opts.pump_f_hi, "pump grid end, Hz")->required();
    c_gm->add_option("--pump-p-lo", gm_opts.pump_p_lo_dbm, "pump power start, dBm")->required();
    c_gm->add_option("--pump-p-hi", gm_opts.pump_p_hi_dbm, "pump power end, dBm")->required();
    c_gm->add_option("--nx", gm_opts.nx, "pump frequency points");
    c_gm->add_option("--ny", gm_opts.ny, "pump power points");
    c_gm->add_option("--delta", gm_opts.delta_hz, "signal offset from the pump, Hz");
    c_gm->add_option("--out", gm_opts.out, "write the result record (JSON)");
    c_gm->add_option("--plot", gm_opts.plot_path, "write the gain map (SVG)");

    CalibrateHemtOpts ch_opts;
    auto* c_ch = app.add_subcommand("calibrate-hemt", "HEMT added noise from a hot/cold sweep");
    c_ch->add_option("--in", ch_opts.in, "calibration CSV (Tset_K,psd_K)")->required();
    c_ch->add_option("--f", ch_opts.f, "measurement frequency, Hz")->required();
    c_ch->add_option("--out", ch_opts.out, "write the result record (JSON)");

    EstimateAttenuationOpts ea_opts;
    auto* c_ea = app.add_subcommand("estimate-attenuation",
                                    "input-line attenuation from a tone above the noise floor");
    c_ea->add_option("--signal-dbm", ea_opts.signal_dbm, "source output power, dBm")->required();
    c_ea->add_option("--margin-db", ea_opts.margin_db, "tone height above the floor, dB")->required();
    c_ea->add_option("--t-noise", ea_opts.t_noise, "floor noise temperature, K")->required();
    c_ea->add_option("--rbw", ea_opts.rbw, "resolution bandwidth, Hz")->required();
    c_ea->add_option("--cavity-loss-db", ea_opts.cavity_loss_db, "reflection loss at the device, dB (<= 0)");
    c_ea->add_option("--out", ea_opts.out, "write the result record (JSON)");

    ReferNoiseOpts rn_opts;
    auto* c_rn = app.add_subcommand("refer-noise", "refer a measured PSD to the device input");
    c_rn->add_option("--s-meas", rn_opts.s_meas_k, "measured PSD at the HEMT input, K")->required();
    c_rn->add_option("--t-hemt", rn_opts.t_hemt, "HEMT added noise, K")->required();
    c_rn->add_option("--f", rn_opts.f, "measurement frequency, Hz")->required();
    c_rn->add_option("--eta-s", rn_opts.eta_s, "sample-to-HEMT transmission")->required();
    c_rn->add_option("--eta-c-off", rn_opts.eta_c_off, "pump-off circulator transmission");
    c_rn->add_option("--gain-db", rn_opts.gain_db, "device gain when pumped, dB");
    c_rn->add_option("--out", rn_opts.out, "write the result record (JSON)");

    DeltaSnrOpts ds_opts;
    auto* c_ds = app.add_subcommand("delta-snr", "pilot SNR improvement between two spectra");
    c_ds->add_option("--on", ds_opts.on, "pump-on spectrum CSV")->required();
    c_ds->add_option("--off", ds_opts.off, "pump-off spectrum CSV")->required();
    c_ds->add_option("--pilot-f", ds_opts.pilot_f, "pilot tone frequency, Hz")->required();
    c_ds->add_option("--out", ds_opts.out, "write the result record (JSON)");

    auto* c_sim = app.add_subcommand("simulate", "generate synthetic data sets");
    c_sim->require_subcommand(1);

    SimReflectionOpts sr_opts;
    auto* c_sr = c_sim->add_subcommand("reflection", "single-tone reflection sweep");
    c_sr->add_option("--fr", sr_opts.fr, "resonance, Hz")->required();
    c_sr->add_option("--kappa-i", sr_opts.kappa_i_hz, "internal linewidth, Hz")->required();
    c_sr->add_option("--kappa-ex", sr_opts.kappa_ex_hz, "external linewidth, Hz")->required();
    c_sr->add_option("--kerr", sr_opts.kerr_hz, "Kerr per photon, Hz");
    c_sr->add_option("--power-dbm", sr_opts.power_dbm, "probe power, dBm");
    c_sr->add_option("--f-lo", sr_opts.f_lo, "sweep start, Hz")->required();
    c_sr->add_option("--f-hi", sr_opts.f_hi, "sweep end, Hz")->required();
    c_sr->add_option("--points", sr_opts.points, "sweep points");
    c_sr->add_option("--noise", sr_opts.noise, "complex noise rms");
    c_sr->add_option("--seed", sr_opts.seed, "random seed");
    c_sr->add_option("--out-csv", sr_opts.out_csv, "output CSV path")->required();
    c_sr->add_option("--out", sr_opts.out, "write the result record (JSON)");

    SimSpectrumOpts ss_opts;
    auto* c_ss = c_sim->add_subcommand("spectrum", "pump-on/off spectra with a pilot tone");
    c_ss->add_option("--fr", ss_opts.fr, "resonance, Hz")->required();
    c_ss->add_option("--kappa-i", ss_opts.kappa_i_hz, "internal linewidth, Hz")->required();
    c_ss->add_option("--kappa-ex", ss_opts.kappa_ex_hz, "external linewidth, Hz")->required();
    c_ss->add_option("--kerr", ss_opts.kerr_hz, "Kerr per photon, Hz")->required();
    c_ss->add_option("--pump-f", ss_opts.pump_f, "pump frequency, Hz")->required();
    c_ss->add_option("--pump-dbm", ss_opts.pump_dbm, "pump power, dBm")->required();
    c_ss->add_option("--pilot-f", ss_opts.pilot_f, "pilot frequency, Hz")->required();
    c_ss->add_option("--pilot-dbm", ss_opts.pilot_dbm, "pilot power, dBm")->required();
    c_ss->add_option("--rbw", ss_opts.rbw, "resolution bandwidth, Hz")->required();
    c_ss->add_option("--f-lo", ss_opts.f_lo, "span start, Hz")->required();
    c_ss->add_option("--f-hi", ss_opts.f_hi, "span end, Hz")->required();
    c_ss->add_option("--eta-s", ss_opts.eta_s, "sample-to-HEMT transmission");
    c_ss->add_option("--eta-c-off", ss_opts.eta_c_off, "pump-off circulator transmission");
    c_ss->add_option("--t-hemt", ss_opts.t_hemt, "HEMT noise temperature, K");
    c_ss->add_option("--leak", ss_opts.leak, "pump leakage fraction");
    c_ss->add_option("--seed", ss_opts.seed, "random seed");
    c_ss->add_option("--out-on", ss_opts.out_on, "pump-on CSV path")->required();
    c_ss->add_option("--out-off", ss_opts.out_off, "pump-off CSV path")->required();
    c_ss->add_option("--out", ss_opts.out, "write the result record (JSON)");

    SimGateSweepOpts sg_opts;
    auto* c_sg = c_sim->add_subcommand("gate-sweep", "resonance and linewidths versus gate voltage");
    c_sg->add_option("--f0", sg_opts.f0, "junction-shorted resonance, Hz")->required();
    c_sg->add_option("--f-geo", sg_opts.f_geo, "geometric scale frequency, Hz")->required();
    c_sg->add_option("--alpha-l", sg_opts.alpha_l, "distributed loss, nepers")->required();
    c_sg->add_option("--rj", sg_opts.rj, "junction subgap resistance, ohm")->required();
    c_sg->add_option("--ck", sg_opts.ck, "coupling capacitance, F")->required();
    c_sg->add_option("--vg-lo", sg_opts.vg_lo, "gate sweep start, V");
    c_sg->add_option("--vg-hi", sg_opts.vg_hi, "gate sweep end, V");
    c_sg->add_option("--points", sg_opts.points, "sweep points");
    c_sg->add_option("--noise-frac", sg_opts.noise_frac, "multiplicative rate noise");
    c_sg->add_option("--seed", sg_opts.seed, "random seed");
    c_sg->add_option("--map-csv", sg_opts.map_csv, "gate map CSV (Vg_V,Lj_H); default built-in");
    c_sg->add_option("--out-csv", sg_opts.out_csv, "output CSV path")->required();
    c_sg->add_option("--out", sg_opts.out, "write the result record (JSON)");

    PlotOpts pl_opts;
    auto* c_pl = app.add_subcommand("plot", "render series from a result record as SVG");
    c_pl->add_option("--record", pl_opts.record, "result record JSON")->required();
    c_pl->add_option("--kind", pl_opts.kind, "trace|envelope|map");
    c_pl->add_option("--x", pl_opts.x, "abscissa series name");
    c_pl->add_option("--y", pl_opts.y, "ordinate series name (repeatable)");
    c_pl->add_option("--y-lo", pl_opts.y_lo, "envelope lower series");
    c_pl->add_option("--y-hi", pl_opts.y_hi, "envelope upper series");
    c_pl->add_option("--y-axis", pl_opts.y_axis, "map second axis series");
    c_pl->add_option("--z", pl_opts.z, "map value series");
    c_pl->add_option("--title", pl_opts.title, "plot title");
    c_pl->add_option("--out", pl_opts.out, "output SVG path")->required();

    c_fr->callback([&] { run_fit_resonance(fr_opts, out); });
    c_fc->callback([&] { run_fit_circuit(fc_opts, out); });
    c_ke->callback([&] { run_kerr_extract(ke_opts, out); });
    c_kp->callback([&] { run_kerr_predict(kp_opts, out); });
    c_gm->callback([&] { run_gain_map(gm_opts, out); });
    c_ch->callback([&] { run_calibrate_hemt(ch_opts, out); });
    c_ea->callback([&] { run_estimate_attenuation(ea_opts, out); });
    c_rn->callback([&] { run_refer_noise(rn_opts, out); });
    c_ds->callback([&] { run_delta_snr(ds_opts, out); });
    c_sr->callback([&] { run_sim_reflection(sr_opts, out); });
    c_ss->callback([&] { run_sim_spectrum(ss_opts, out); });
    c_sg->callback([&] { run_sim_gate_sweep(sg_opts, out); });
    c_pl->callback([&] { run_plot(pl_opts, out); });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (app.get_subcommands().empty()) {
            out << app.help();
            return 0;
        }
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        print_error(err, "usage", e.what());
        return 2;
    } catch (const Error& e) {
        print_error(err, e.category_name(), e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        print_error(err, "internal", e.what());
        return 1;
    }
}

} // namespace jpakit::cli
