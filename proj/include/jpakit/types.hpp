#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace jpakit {

// Convention used everywhere in this library: decay/coupling rates ("kappa")
// are angular rates in s^-1 internally; file and record I/O reports kappa/2pi in Hz.

// One-port complex reflection versus frequency.
struct ComplexReflectionTrace {
    std::vector<double> f_hz;                 // strictly increasing
    std::vector<std::complex<double>> s11;
    std::optional<double> probe_power_dbm;
    std::optional<double> gate_voltage_v;

    std::size_t size() const { return f_hz.size(); }
    double span_hz() const { return f_hz.empty() ? 0.0 : f_hz.back() - f_hz.front(); }
    void validate() const;                    // throws ValidationError
};

// Power spectral density trace, one value per resolution-bandwidth bin.
struct SpectrumTrace {
    std::vector<double> f_hz;                 // bin centers, strictly increasing
    std::vector<double> psd_dbm;              // power per bin in dBm
    double rbw_hz = 1.0;
    std::map<std::string, double> meta;       // pump_f_Hz, pilot_f_Hz, pump_on, ...

    std::size_t size() const { return f_hz.size(); }
    std::size_t bin_of(double f) const;       // nearest bin index
    void validate() const;
};

// Scalar transmission (dB) versus frequency; used for insertion-loss comparisons.
struct TransmissionTrace {
    std::vector<double> f_hz;
    std::vector<double> s21_db;
    void validate() const;
};

struct UncertainValue {
    double value = 0.0;
    double sigma = 0.0;
};

} // namespace jpakit
