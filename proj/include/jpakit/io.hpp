#pragma once

#include "jpakit/chain.hpp"
#include "jpakit/kerr.hpp"
#include "jpakit/simulator.hpp"
#include "jpakit/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jpakit::io {

double dbm_to_w(double dbm);
double w_to_dbm(double w);

// FNV-1a 64-bit content digest, reported as "fnv1a64:<16 hex digits>".
std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_string(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// ---- CSV ----
//
// Format: optional "# key = value" metadata comments, one header row naming
// the columns, then numeric rows. Column names carry explicit base SI units
// (f_Hz, psd_dBm, Vg_V, ...); scaled variants such as f_GHz are rejected.

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;          // column-major
    std::map<std::string, std::string> metadata;

    std::size_t rows() const { return data.empty() ? 0 : data[0].size(); }
    bool has_column(std::string_view name) const;
    const std::vector<double>& column(std::string_view name) const;   // SchemaError
    double meta_number(const std::string& key, double fallback) const;
};

CsvTable parse_csv(std::string_view text);
void require_columns(const CsvTable& t, std::span<const std::string_view> mandatory,
                     std::string_view what);

ComplexReflectionTrace reflection_from_csv(std::string_view text);
SpectrumTrace spectrum_from_csv(std::string_view text);
TransmissionTrace transmission_from_csv(std::string_view text);
std::vector<kerr::PowerSweepPoint> power_sweep_from_csv(std::string_view text);
std::vector<chain::HemtPoint> hemt_points_from_csv(std::string_view text);

struct GateSweepData {
    std::vector<double> vg_v;
    std::vector<double> f_r_hz;
    std::vector<double> kappa_i;    // angular s^-1 (converted from the _Hz columns)
    std::vector<double> kappa_ex;
};
GateSweepData gate_sweep_from_csv(std::string_view text);

std::string reflection_to_csv(const ComplexReflectionTrace& t);
std::string spectrum_to_csv(const SpectrumTrace& t);
std::string transmission_to_csv(const TransmissionTrace& t);
std::string gate_sweep_to_csv(std::span<const sim::GateSweepRow> rows);
std::string power_sweep_to_csv(std::span<const kerr::PowerSweepPoint> rows);

// ---- Touchstone v1, one-port subset ----
//
// "!" comments; one option line "# <HZ|KHZ|MHZ|GHZ> S <RI|MA|DB> R <ohms>";
// data rows "f a b" with the pair interpreted per the declared format
// (angles in degrees).
ComplexReflectionTrace parse_touchstone(std::string_view text);

// Load a reflection trace by format name: "auto" (by extension, .s1p vs
// .csv), "touchstone", or "csv".
ComplexReflectionTrace load_reflection(const std::string& path, const std::string& format = "auto");

// ---- result records ----
//
// Canonical JSON document for every command result: echoed inputs, named
// outputs with units, and provenance (tool, version, seed, timestamp,
// content digest). The digest covers everything except the timestamp, so
// reruns with SOURCE_DATE_EPOCH pinned are byte-identical.

struct ResultRecord {
    std::string command;
    nlohmann::json inputs = nlohmann::json::object();
    nlohmann::json outputs = nlohmann::json::object();
    std::vector<std::string> warnings;
    bool has_seed = false;
    std::uint64_t seed = 0;

    void add_scalar(const std::string& name, double value, const std::string& unit);
    void add_scalar(const std::string& name, double value, const std::string& unit, double sigma);
    void add_array(const std::string& name, std::span<const double> values, const std::string& unit);

    nlohmann::json to_json() const;       // includes provenance and digest
    std::string to_text() const;          // dump(2) + newline
};

ResultRecord record_from_json(const nlohmann::json& j);
ResultRecord load_record(const std::string& path);

// UTC timestamp string; honors SOURCE_DATE_EPOCH for reproducible output.
std::string timestamp_utc();

} // namespace jpakit::io
