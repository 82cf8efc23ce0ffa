#include "jpakit/types.hpp"
#include "jpakit/errors.hpp"

#include <cmath>

namespace jpakit {

namespace {

void check_axis(const std::vector<double>& f, std::size_t min_points, const char* what) {
    if (f.size() < min_points)
        throw ValidationError(std::string(what) + " requires at least " +
                              std::to_string(min_points) + " points");
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!std::isfinite(f[i]) || f[i] <= 0.0)
            throw ValidationError(std::string(what) + ": frequency axis must be positive and finite");
        if (i > 0 && f[i] <= f[i - 1])
            throw ValidationError(std::string(what) + ": frequency axis must be strictly increasing");
    }
}

} // namespace

void ComplexReflectionTrace::validate() const {
    check_axis(f_hz, 5, "reflection trace");
    if (s11.size() != f_hz.size())
        throw ValidationError("reflection trace: frequency and s11 lengths differ");
    for (const auto& z : s11)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw ValidationError("reflection trace: s11 contains non-finite values");
}

void SpectrumTrace::validate() const {
    check_axis(f_hz, 5, "spectrum");
    if (psd_dbm.size() != f_hz.size())
        throw ValidationError("spectrum: frequency and psd lengths differ");
    for (double v : psd_dbm)
        if (!std::isfinite(v))
            throw ValidationError("spectrum: psd contains non-finite values");
    if (!(rbw_hz > 0.0))
        throw ValidationError("spectrum: resolution bandwidth must be positive");
}

std::size_t SpectrumTrace::bin_of(double f) const {
    if (f_hz.empty())
        throw ValidationError("spectrum: empty trace");
    std::size_t best = 0;
    double best_d = std::abs(f_hz[0] - f);
    for (std::size_t i = 1; i < f_hz.size(); ++i) {
        const double d = std::abs(f_hz[i] - f);
        if (d < best_d) { best_d = d; best = i; }
    }
    return best;
}

void TransmissionTrace::validate() const {
    check_axis(f_hz, 2, "transmission trace");
    if (s21_db.size() != f_hz.size())
        throw ValidationError("transmission trace: frequency and s21 lengths differ");
    for (double v : s21_db)
        if (!std::isfinite(v))
            throw ValidationError("transmission trace: s21 contains non-finite values");
}

} // namespace jpakit
