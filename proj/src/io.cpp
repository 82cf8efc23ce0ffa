#include "jpakit/io.hpp"
#include "jpakit/constants.hpp"
#include "jpakit/errors.hpp"
#include "jpakit/version.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace jpakit::io {

using constants::two_pi;

double dbm_to_w(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double w_to_dbm(double w) {
    if (!(w > 0.0))
        throw ValidationError("w_to_dbm requires a positive power");
    return 10.0 * std::log10(w / 1e-3);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string digest_string(std::string_view bytes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw ParseError("short write: " + path);
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            std::string_view line = text.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            out.push_back(line);
            start = i + 1;
        }
    }
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

bool CsvTable::has_column(std::string_view name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

const std::vector<double>& CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return data[i];
    throw SchemaError("missing mandatory column '" + std::string(name) + "'");
}

double CsvTable::meta_number(const std::string& key, double fallback) const {
    auto it = metadata.find(key);
    if (it == metadata.end()) return fallback;
    double v;
    if (!parse_double(it->second, v))
        throw ParseError("metadata key '" + key + "' is not numeric: '" + it->second + "'");
    return v;
}

CsvTable parse_csv(std::string_view text) {
    CsvTable t;
    bool have_header = false;
    std::size_t lineno = 0;
    for (std::string_view raw : lines_of(text)) {
        ++lineno;
        std::string_view line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            line.remove_prefix(1);
            const auto eq = line.find('=');
            if (eq != std::string_view::npos) {
                auto key = trim(line.substr(0, eq));
                auto val = trim(line.substr(eq + 1));
                if (!key.empty()) t.metadata[std::string(key)] = std::string(val);
            }
            continue;
        }
        auto cells = split(line, ',');
        if (!have_header) {
            for (auto c : cells) {
                if (c.empty())
                    throw ParseError("line " + std::to_string(lineno) + ": empty column name in header");
                t.columns.emplace_back(c);
            }
            t.data.assign(t.columns.size(), {});
            have_header = true;
            continue;
        }
        if (cells.size() != t.columns.size())
            throw ParseError("line " + std::to_string(lineno) + ": expected " +
                             std::to_string(t.columns.size()) + " cells, got " +
                             std::to_string(cells.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double v;
            if (!parse_double(cells[i], v))
                throw ParseError("line " + std::to_string(lineno) + ", column '" +
                                 t.columns[i] + "': cannot parse '" + std::string(cells[i]) + "'");
            t.data[i].push_back(v);
        }
    }
    if (!have_header)
        throw ParseError("no header row found");
    return t;
}

void require_columns(const CsvTable& t, std::span<const std::string_view> mandatory,
                     std::string_view what) {
    for (auto name : mandatory) {
        if (t.has_column(name)) continue;
        std::string msg = std::string(what) + ": missing mandatory column '" +
                          std::string(name) + "'";
        // Point at unit mistakes: same stem with a scaled suffix.
        const auto us = name.rfind('_');
        if (us != std::string_view::npos) {
            const std::string stem(name.substr(0, us + 1));
            for (const auto& have : t.columns) {
                if (have.size() > stem.size() && have.compare(0, stem.size(), stem) == 0) {
                    msg += " (found '" + have + "'; only base-unit columns such as '" +
                           std::string(name) + "' are accepted)";
                    break;
                }
            }
        }
        throw SchemaError(msg);
    }
}

ComplexReflectionTrace reflection_from_csv(std::string_view text) {
    const auto t = parse_csv(text);
    static constexpr std::string_view cols[] = {"f_Hz", "re", "im"};
    require_columns(t, cols, "reflection trace");
    ComplexReflectionTrace out;
    out.f_hz = t.column("f_Hz");
    const auto& re = t.column("re");
    const auto& im = t.column("im");
    out.s11.resize(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) out.s11[i] = {re[i], im[i]};
    if (t.metadata.count("probe_power_dBm"))
        out.probe_power_dbm = t.meta_number("probe_power_dBm", 0.0);
    if (t.metadata.count("Vg_V"))
        out.gate_voltage_v = t.meta_number("Vg_V", 0.0);
    out.validate();
    return out;
}

SpectrumTrace spectrum_from_csv(std::string_view text) {
    const auto t = parse_csv(text);
    static constexpr std::string_view cols[] = {"f_Hz", "psd_dBm"};
    require_columns(t, cols, "spectrum");
    SpectrumTrace out;
    out.f_hz = t.column("f_Hz");
    out.psd_dbm = t.column("psd_dBm");
    double spacing = out.f_hz.size() > 1 ? out.f_hz[1] - out.f_hz[0] : 1.0;
    out.rbw_hz = t.meta_number("rbw_Hz", spacing);
    for (const char* key : {"pump_on", "pump_f_Hz", "pilot_f_Hz"})
        if (t.metadata.count(key)) out.meta[key] = t.meta_number(key, 0.0);
    out.validate();
    return out;
}

TransmissionTrace transmission_from_csv(std::string_view text) {
    const auto t = parse_csv(text);
    static constexpr std::string_view cols[] = {"f_Hz", "s21_dB"};
    require_columns(t, cols, "transmission trace");
    TransmissionTrace out;
    out.f_hz = t.column("f_Hz");
    out.s21_db = t.column("s21_dB");
    out.validate();
    return out;
}

std::vector<kerr::PowerSweepPoint> power_sweep_from_csv(std::string_view text) {
    const auto t = parse_csv(text);
    static constexpr std::string_view cols[] = {"Pin_dBm", "fr_Hz"};
    require_columns(t, cols, "power sweep");
    const auto& p = t.column("Pin_dBm");
    const auto& fr = t.column("fr_Hz");
    std::vector<kerr::PowerSweepPoint> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i].p_in_w = dbm_to_w(p[i]);
        out[i].f_r_hz = fr[i];
        // dip-tracking measurement: the probe sits on the resonance it records
        out[i].f_signal_hz = fr[i];
    }
    if (out.size() < 3)
        throw ValidationError("power sweep requires at least 3 rows");
    return out;
}

std::vector<chain::HemtPoint> hemt_points_from_csv(std::string_view text) {
    const auto t = parse_csv(text);
    static constexpr std::string_view cols[] = {"Tset_K", "psd_K"};
    require_columns(t, cols, "calibration sweep");
    const auto& ts = t.column("Tset_K");
    const auto& psd = t.column("psd_K");
    std::vector<chain::HemtPoint> out(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) out[i] = {ts[i], psd[i]};
    return out;
}

GateSweepData gate_sweep_from_csv(std::string_view text) {
    const auto t = parse_csv(text);
    static constexpr std::string_view cols[] = {"Vg_V", "fr_Hz", "kappa_i_Hz", "kappa_ex_Hz"};
    require_columns(t, cols, "gate sweep");
    GateSweepData out;
    out.vg_v = t.column("Vg_V");
    out.f_r_hz = t.column("fr_Hz");
    out.kappa_i = t.column("kappa_i_Hz");
    out.kappa_ex = t.column("kappa_ex_Hz");
    for (auto& v : out.kappa_i) v *= two_pi;
    for (auto& v : out.kappa_ex) v *= two_pi;
    return out;
}

std::string reflection_to_csv(const ComplexReflectionTrace& t) {
    std::string s;
    if (t.probe_power_dbm)
        s += "# probe_power_dBm = " + fmt_g17(*t.probe_power_dbm) + "\n";
    if (t.gate_voltage_v)
        s += "# Vg_V = " + fmt_g17(*t.gate_voltage_v) + "\n";
    s += "f_Hz,re,im\n";
    for (std::size_t i = 0; i < t.f_hz.size(); ++i)
        s += fmt_g17(t.f_hz[i]) + "," + fmt_g17(t.s11[i].real()) + "," +
             fmt_g17(t.s11[i].imag()) + "\n";
    return s;
}

std::string spectrum_to_csv(const SpectrumTrace& t) {
    std::string s = "# rbw_Hz = " + fmt_g17(t.rbw_hz) + "\n";
    for (const auto& [k, v] : t.meta)
        s += "# " + k + " = " + fmt_g17(v) + "\n";
    s += "f_Hz,psd_dBm\n";
    for (std::size_t i = 0; i < t.f_hz.size(); ++i)
        s += fmt_g17(t.f_hz[i]) + "," + fmt_g17(t.psd_dbm[i]) + "\n";
    return s;
}

std::string transmission_to_csv(const TransmissionTrace& t) {
    std::string s = "f_Hz,s21_dB\n";
    for (std::size_t i = 0; i < t.f_hz.size(); ++i)
        s += fmt_g17(t.f_hz[i]) + "," + fmt_g17(t.s21_db[i]) + "\n";
    return s;
}

std::string gate_sweep_to_csv(std::span<const sim::GateSweepRow> rows) {
    std::string s = "Vg_V,fr_Hz,kappa_i_Hz,kappa_ex_Hz\n";
    for (const auto& r : rows)
        s += fmt_g17(r.vg_v) + "," + fmt_g17(r.f_r_hz) + "," +
             fmt_g17(r.kappa_i / two_pi) + "," + fmt_g17(r.kappa_ex / two_pi) + "\n";
    return s;
}

std::string power_sweep_to_csv(std::span<const kerr::PowerSweepPoint> rows) {
    std::string s = "Pin_dBm,fr_Hz\n";
    for (const auto& r : rows)
        s += fmt_g17(w_to_dbm(r.p_in_w)) + "," + fmt_g17(r.f_r_hz) + "\n";
    return s;
}

ComplexReflectionTrace parse_touchstone(std::string_view text) {
    ComplexReflectionTrace out;
    double unit_scale = 0.0;
    enum class Fmt { ri, ma, db } fmt = Fmt::ri;
    bool have_options = false;
    std::size_t lineno = 0;

    for (std::string_view raw : lines_of(text)) {
        ++lineno;
        std::string_view line = raw;
        const auto bang = line.find('!');
        if (bang != std::string_view::npos) line = line.substr(0, bang);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '#') {
            if (have_options)
                throw ParseError("line " + std::to_string(lineno) +
                                 ": duplicate option line");
            std::string upper(line.substr(1));
            std::transform(upper.begin(), upper.end(), upper.begin(),
                           [](unsigned char c) { return std::toupper(c); });
            auto tok = split(upper, ' ');
            tok.erase(std::remove_if(tok.begin(), tok.end(),
                                     [](std::string_view s) { return s.empty(); }),
                      tok.end());
            if (tok.size() != 5 || tok[1] != "S" || tok[3] != "R")
                throw ParseError("line " + std::to_string(lineno) +
                                 ": option line must read '# <unit> S <RI|MA|DB> R <ohms>'");
            if (tok[0] == "HZ") unit_scale = 1.0;
            else if (tok[0] == "KHZ") unit_scale = 1e3;
            else if (tok[0] == "MHZ") unit_scale = 1e6;
            else if (tok[0] == "GHZ") unit_scale = 1e9;
            else throw ParseError("line " + std::to_string(lineno) +
                                  ": unknown frequency unit '" + std::string(tok[0]) + "'");
            if (tok[2] == "RI") fmt = Fmt::ri;
            else if (tok[2] == "MA") fmt = Fmt::ma;
            else if (tok[2] == "DB") fmt = Fmt::db;
            else throw ParseError("line " + std::to_string(lineno) +
                                  ": unknown data format '" + std::string(tok[2]) + "'");
            double r;
            if (!parse_double(tok[4], r) || !(r > 0.0))
                throw ParseError("line " + std::to_string(lineno) +
                                 ": bad reference resistance");
            have_options = true;
            continue;
        }

        if (!have_options)
            throw ParseError("line " + std::to_string(lineno) +
                             ": data before the option line");
        auto fields = split(line, ' ');
        fields.erase(std::remove_if(fields.begin(), fields.end(),
                                    [](std::string_view s) { return s.empty(); }),
                     fields.end());
        // tolerate tab separation
        if (fields.size() == 1) {
            fields = split(line, '\t');
            fields.erase(std::remove_if(fields.begin(), fields.end(),
                                        [](std::string_view s) { return s.empty(); }),
                         fields.end());
        }
        if (fields.size() != 3)
            throw ParseError("line " + std::to_string(lineno) +
                             ": expected 3 fields for one-port data, got " +
                             std::to_string(fields.size()));
        double f, a, b;
        if (!parse_double(fields[0], f) || !parse_double(fields[1], a) ||
            !parse_double(fields[2], b))
            throw ParseError("line " + std::to_string(lineno) + ": cannot parse data row");

        std::complex<double> s11;
        switch (fmt) {
        case Fmt::ri: s11 = {a, b}; break;
        case Fmt::ma: s11 = std::polar(a, b * constants::pi / 180.0); break;
        case Fmt::db: s11 = std::polar(std::pow(10.0, a / 20.0), b * constants::pi / 180.0); break;
        }
        out.f_hz.push_back(f * unit_scale);
        out.s11.push_back(s11);
    }

    if (!have_options)
        throw ParseError("no option line found");
    out.validate();
    return out;
}

ComplexReflectionTrace load_reflection(const std::string& path, const std::string& format) {
    std::string fmt = format;
    if (fmt == "auto") {
        const auto dot = path.rfind('.');
        std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (ext == "s1p" || ext == "snp" || ext == "ts") fmt = "touchstone";
        else if (ext == "csv") fmt = "csv";
        else throw UsageError("cannot infer format of '" + path +
                              "'; pass --format touchstone|csv");
    }
    const std::string text = read_file(path);
    if (fmt == "touchstone") return parse_touchstone(text);
    if (fmt == "csv") return reflection_from_csv(text);
    throw UsageError("unknown format '" + format + "'");
}

void ResultRecord::add_scalar(const std::string& name, double value, const std::string& unit) {
    nlohmann::json entry;
    entry["value"] = value;
    entry["unit"] = unit;
    outputs[name] = entry;
}

void ResultRecord::add_scalar(const std::string& name, double value, const std::string& unit,
                              double sigma) {
    add_scalar(name, value, unit);
    outputs[name]["sigma"] = sigma;
}

void ResultRecord::add_array(const std::string& name, std::span<const double> values,
                             const std::string& unit) {
    nlohmann::json entry;
    entry["value"] = std::vector<double>(values.begin(), values.end());
    entry["unit"] = unit;
    outputs[name] = entry;
}

nlohmann::json ResultRecord::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["warnings"] = warnings;
    nlohmann::json prov;
    prov["tool"] = "jpakit";
    prov["version"] = jpakit::version;
    if (has_seed) prov["seed"] = seed;
    j["provenance"] = prov;
    j["provenance"]["digest"] = digest_string(j.dump());
    j["provenance"]["timestamp"] = timestamp_utc();
    return j;
}

std::string ResultRecord::to_text() const { return to_json().dump(2) + "\n"; }

ResultRecord record_from_json(const nlohmann::json& j) {
    ResultRecord r;
    if (!j.is_object() || !j.contains("outputs") || !j["outputs"].is_object())
        throw ValidationError("result record: missing outputs object");
    r.command = j.value("command", "");
    if (j.contains("inputs")) r.inputs = j["inputs"];
    r.outputs = j["outputs"];
    if (j.contains("warnings") && j["warnings"].is_array())
        for (const auto& w : j["warnings"]) r.warnings.push_back(w.get<std::string>());
    if (j.contains("provenance") && j["provenance"].contains("seed")) {
        r.has_seed = true;
        r.seed = j["provenance"]["seed"].get<std::uint64_t>();
    }
    return r;
}

ResultRecord load_record(const std::string& path) {
    const std::string text = read_file(path);
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ParseError("not valid JSON: " + path);
    return record_from_json(j);
}

std::string timestamp_utc() {
    std::time_t t;
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace jpakit::io
