#pragma once

#include "jpakit/chain.hpp"
#include "jpakit/circuit.hpp"
#include "jpakit/kerr.hpp"
#include "jpakit/paramp.hpp"
#include "jpakit/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace jpakit::sim {

// Driven Kerr cavity, one port. Per-photon Kerr shift k is angular (s^-1)
// and negative for a softening junction nonlinearity.
struct KerrCavity {
    double f_r_hz = 6e9;
    double kappa_i = 0.0;    // angular s^-1
    double kappa_ex = 0.0;   // angular s^-1
    double k = 0.0;          // self-Kerr per photon, angular s^-1

    double kappa_tot() const { return kappa_i + kappa_ex; }
    void validate() const;
};

// Pump detuning convention: delta_p = 2 pi (f_pump - f_r). A softening
// cavity (k < 0) bifurcates for red detunings delta_p <= -sqrt(3) kappa/2.
struct PumpDrive {
    double f_pump_hz = 0.0;
    double p_pump_w = 0.0;
};

enum class Branch { low, high };

struct SteadyState {
    double n = 0.0;          // intracavity photons
    int branch_count = 1;    // positive real roots of the steady-state cubic
    double delta_p = 0.0;    // angular pump detuning used
};

// Steady-state photon number from the cubic
//   n ((kappa/2)^2 + (delta_p - k n)^2) = kappa_ex p / (h f_pump).
// In the bistable region Branch selects the small- or large-n stable root;
// the middle root is never returned.
SteadyState steady_state(const KerrCavity& c, const PumpDrive& d, Branch branch = Branch::low);

// Pump power at which the steady-state cubic first becomes multivalued at
// this pump frequency; +inf when the detuning cannot bifurcate.
double critical_power_w(const KerrCavity& c, double f_pump_hz);

// Linearized signal/idler gains at angular detuning delta from the pump.
// Diverges at the bifurcation edge; raises StabilityError on or beyond it.
paramp::GainPair gain_pair(const KerrCavity& c, const PumpDrive& d, double delta,
                           Branch branch = Branch::low);

// Single-tone reflection sweep: the probe populates the cavity
// self-consistently, so the dip drags with power (shift k*n). Complex
// Gaussian noise of rms amplitude noise_sigma is added per point.
ComplexReflectionTrace synth_reflection(const KerrCavity& c, double probe_power_w,
                                        std::span<const double> f_grid_hz,
                                        double noise_sigma, std::uint64_t seed,
                                        Branch branch = Branch::low);

// Resonance-versus-power table as the dip-tracking extraction procedure
// records it: the tabulated resonance moves at half the per-photon Kerr
// rate, so fitting its slope against photon number and doubling recovers k.
// Gaussian jitter of rms jitter_sigma_hz is added to the tabulated resonance.
std::vector<kerr::PowerSweepPoint> synth_power_sweep(const KerrCavity& c,
                                                     std::span<const double> powers_w,
                                                     double jitter_sigma_hz,
                                                     std::uint64_t seed);

struct SpectrumPair {
    SpectrumTrace pump_on;
    SpectrumTrace pump_off;
};

// Pump-on/pump-off spectra of a pilot tone riding on the amplified vacuum
// floor, propagated through the readout chain. Bin noise is multiplicative
// unit-mean exponential (radiometer statistics); the coherent tones are
// deterministic. The pump-off pilot passes through eta_c_off * eta_s; the
// pump-on pilot and idler take the cavity gains times eta_s.
SpectrumPair synth_spectrum(const KerrCavity& c, const PumpDrive& d,
                            const chain::NoiseChain& ch,
                            double pilot_f_hz, double pilot_p_w,
                            double rbw_hz, double f_lo_hz, double f_hi_hz,
                            std::uint64_t seed,
                            double pump_leak_fraction = 1e-6);

// Gate voltage -> junction inductance lookup with linear interpolation.
struct GateMap {
    std::vector<double> vg_v;    // strictly increasing
    std::vector<double> l_j_h;

    double at(double vg) const;
    void validate() const;
    static GateMap default_map();   // smooth pinch-off near -2.5 V, 10 uA open
};

struct GateSweepRow {
    double vg_v = 0.0;
    double f_r_hz = 0.0;
    double kappa_i = 0.0;    // angular s^-1
    double kappa_ex = 0.0;   // angular s^-1
};

// Gate sweep through the circuit model: resonance and both decay rates at
// each gate point, with optional multiplicative Gaussian noise on the rates.
std::vector<GateSweepRow> synth_gate_sweep(const GateMap& map, const circuit::CircuitModel& m,
                                           std::span<const double> vg_grid,
                                           double noise_fraction = 0.0,
                                           std::uint64_t seed = 0);

} // namespace jpakit::sim
