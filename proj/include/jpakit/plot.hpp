#pragma once

#include "jpakit/io.hpp"

#include <string>
#include <vector>

namespace jpakit::plot {

// Declarative plot over series stored in a ResultRecord's outputs. Series
// are referenced by output name; units come from the record. Emission is
// deterministic: fixed formatting, no timestamps.
struct PlotSpec {
    enum class Kind { trace, envelope, map };
    Kind kind = Kind::trace;

    std::string x;                  // abscissa series
    std::vector<std::string> y;     // trace: one or more ordinate series
    std::string y_lo, y_hi;         // envelope bounds
    std::string y_axis;             // map: second axis series
    std::string z;                  // map: cell values, row-major over y_axis
    std::string title;

    int width = 800;
    int height = 520;
};

// Renders SVG text. Throws ValidationError when a referenced series is
// missing, not an array, or has mismatched length.
std::string emit_svg(const io::ResultRecord& record, const PlotSpec& spec);

} // namespace jpakit::plot
