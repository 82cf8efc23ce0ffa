#include "jpakit/plot.hpp"
#include "jpakit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace jpakit::plot {

namespace {

std::string num(double v, const char* spec = "%.6g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string px(double v) { return num(v, "%.3f"); }

struct Series {
    std::vector<double> values;
    std::string unit;
};

Series get_series(const io::ResultRecord& rec, const std::string& name) {
    if (!rec.outputs.contains(name))
        throw ValidationError("plot: series '" + name + "' not found in record outputs");
    const auto& entry = rec.outputs[name];
    if (!entry.is_object() || !entry.contains("value") || !entry["value"].is_array())
        throw ValidationError("plot: output '" + name + "' is not an array series");
    Series s;
    s.unit = entry.value("unit", "");
    for (const auto& v : entry["value"]) {
        if (v.is_null()) s.values.push_back(std::numeric_limits<double>::quiet_NaN());
        else s.values.push_back(v.get<double>());
    }
    if (s.values.empty())
        throw ValidationError("plot: series '" + name + "' is empty");
    return s;
}

struct Range {
    double lo = 0.0, hi = 1.0;
    void include(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

Range span_of(const std::vector<double>& v) {
    Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (double x : v) r.include(x);
    if (!(r.lo <= r.hi)) throw ValidationError("plot: series has no finite values");
    if (r.lo == r.hi) { r.lo -= 0.5; r.hi += 0.5; }
    const double pad = 0.04 * (r.hi - r.lo);
    return {r.lo - pad, r.hi + pad};
}

struct Rgb { double r, g, b; };

// fixed perceptual ramp, dark blue to yellow
Rgb colormap(double t) {
    static const Rgb stops[] = {
        {0.10, 0.13, 0.35},
        {0.12, 0.40, 0.55},
        {0.13, 0.65, 0.52},
        {0.55, 0.85, 0.30},
        {0.99, 0.91, 0.15},
    };
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * 4.0;
    const int i = std::min(static_cast<int>(pos), 3);
    const double u = pos - i;
    return {stops[i].r + u * (stops[i + 1].r - stops[i].r),
            stops[i].g + u * (stops[i + 1].g - stops[i].g),
            stops[i].b + u * (stops[i + 1].b - stops[i].b)};
}

std::string hex_color(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(c.r * 255.0)),
                  static_cast<int>(std::lround(c.g * 255.0)),
                  static_cast<int>(std::lround(c.b * 255.0)));
    return buf;
}

const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    return colors[i % 5];
}

struct Frame {
    double x0, y0, w, h;   // plot area in pixels, y grows downward
    Range xr, yr;
    double sx(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
    double sy(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }
};

void draw_axes(std::string& s, const Frame& f, const std::string& xlabel,
               const std::string& ylabel, const std::string& title) {
    s += "<rect x=\"" + px(f.x0) + "\" y=\"" + px(f.y0) + "\" width=\"" + px(f.w) +
         "\" height=\"" + px(f.h) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double tx = f.xr.lo + (f.xr.hi - f.xr.lo) * i / 4.0;
        const double ty = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 4.0;
        const double gx = f.sx(tx), gy = f.sy(ty);
        s += "<line x1=\"" + px(gx) + "\" y1=\"" + px(f.y0 + f.h) + "\" x2=\"" + px(gx) +
             "\" y2=\"" + px(f.y0 + f.h + 5) + "\" stroke=\"#333333\"/>\n";
        s += "<text x=\"" + px(gx) + "\" y=\"" + px(f.y0 + f.h + 18) +
             "\" font-size=\"11\" text-anchor=\"middle\">" + num(tx) + "</text>\n";
        s += "<line x1=\"" + px(f.x0 - 5) + "\" y1=\"" + px(gy) + "\" x2=\"" + px(f.x0) +
             "\" y2=\"" + px(gy) + "\" stroke=\"#333333\"/>\n";
        s += "<text x=\"" + px(f.x0 - 8) + "\" y=\"" + px(gy + 4) +
             "\" font-size=\"11\" text-anchor=\"end\">" + num(ty) + "</text>\n";
    }
    s += "<text x=\"" + px(f.x0 + f.w / 2) + "\" y=\"" + px(f.y0 + f.h + 38) +
         "\" font-size=\"13\" text-anchor=\"middle\">" + xlabel + "</text>\n";
    s += "<text x=\"14\" y=\"" + px(f.y0 + f.h / 2) +
         "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         px(f.y0 + f.h / 2) + ")\">" + ylabel + "</text>\n";
    if (!title.empty())
        s += "<text x=\"" + px(f.x0 + f.w / 2) + "\" y=\"18\" font-size=\"14\" "
             "text-anchor=\"middle\">" + title + "</text>\n";
}

std::string polyline(const Frame& f, const std::vector<double>& x,
                     const std::vector<double>& y, const char* color) {
    std::string pts;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(y[i])) continue;
        pts += px(f.sx(x[i])) + "," + px(f.sy(y[i])) + " ";
    }
    return "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
}

std::string label_of(const std::string& name, const std::string& unit) {
    return unit.empty() ? name : name + " [" + unit + "]";
}

} // namespace

std::string emit_svg(const io::ResultRecord& record, const PlotSpec& spec) {
    const double W = spec.width, H = spec.height;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) +
                    "\" height=\"" + num(H) + "\" viewBox=\"0 0 " + num(W) + " " + num(H) +
                    "\">\n<rect width=\"" + num(W) + "\" height=\"" + num(H) +
                    "\" fill=\"#ffffff\"/>\n";

    if (spec.kind == PlotSpec::Kind::trace) {
        if (spec.x.empty() || spec.y.empty())
            throw ValidationError("trace plot requires x and at least one y series");
        const auto xs = get_series(record, spec.x);
        std::vector<Series> ys;
        for (const auto& name : spec.y) {
            ys.push_back(get_series(record, name));
            if (ys.back().values.size() != xs.values.size())
                throw ValidationError("plot: series '" + name + "' length differs from '" +
                                      spec.x + "'");
        }
        Frame f{70, 30, W - 90, H - 80, span_of(xs.values), {}};
        Range yr{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (const auto& y : ys)
            for (double v : y.values) yr.include(v);
        if (!(yr.lo <= yr.hi)) throw ValidationError("plot: no finite ordinate values");
        if (yr.lo == yr.hi) { yr.lo -= 0.5; yr.hi += 0.5; }
        const double pad = 0.04 * (yr.hi - yr.lo);
        f.yr = {yr.lo - pad, yr.hi + pad};
        draw_axes(s, f, label_of(spec.x, xs.unit), label_of(spec.y[0], ys[0].unit), spec.title);
        for (std::size_t k = 0; k < ys.size(); ++k) {
            s += polyline(f, xs.values, ys[k].values, palette(k));
            s += "<text x=\"" + px(f.x0 + f.w - 6) + "\" y=\"" + px(f.y0 + 16 + 16 * k) +
                 "\" font-size=\"11\" text-anchor=\"end\" fill=\"" + palette(k) + "\">" +
                 spec.y[k] + "</text>\n";
        }
    } else if (spec.kind == PlotSpec::Kind::envelope) {
        if (spec.x.empty() || spec.y_lo.empty() || spec.y_hi.empty())
            throw ValidationError("envelope plot requires x, y_lo and y_hi series");
        const auto xs = get_series(record, spec.x);
        const auto lo = get_series(record, spec.y_lo);
        const auto hi = get_series(record, spec.y_hi);
        if (lo.values.size() != xs.values.size() || hi.values.size() != xs.values.size())
            throw ValidationError("plot: envelope series lengths differ from abscissa");
        Frame f{70, 30, W - 90, H - 80, span_of(xs.values), {}};
        Range yr{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (double v : lo.values) yr.include(v);
        for (double v : hi.values) yr.include(v);
        if (!(yr.lo <= yr.hi)) throw ValidationError("plot: no finite ordinate values");
        if (yr.lo == yr.hi) { yr.lo -= 0.5; yr.hi += 0.5; }
        const double pad = 0.04 * (yr.hi - yr.lo);
        f.yr = {yr.lo - pad, yr.hi + pad};
        draw_axes(s, f, label_of(spec.x, xs.unit), label_of(spec.y_lo, lo.unit), spec.title);
        std::string pts;
        for (std::size_t i = 0; i < xs.values.size(); ++i)
            pts += px(f.sx(xs.values[i])) + "," + px(f.sy(lo.values[i])) + " ";
        for (std::size_t i = xs.values.size(); i-- > 0;)
            pts += px(f.sx(xs.values[i])) + "," + px(f.sy(hi.values[i])) + " ";
        s += "<polygon points=\"" + pts + "\" fill=\"#1f77b4\" fill-opacity=\"0.25\" "
             "stroke=\"none\"/>\n";
        s += polyline(f, xs.values, lo.values, "#1f77b4");
        s += polyline(f, xs.values, hi.values, "#1f77b4");
    } else {
        if (spec.x.empty() || spec.y_axis.empty() || spec.z.empty())
            throw ValidationError("map plot requires x, y_axis and z series");
        const auto xs = get_series(record, spec.x);
        const auto ys = get_series(record, spec.y_axis);
        const auto zs = get_series(record, spec.z);
        const std::size_t nx = xs.values.size(), ny = ys.values.size();
        if (zs.values.size() != nx * ny)
            throw ValidationError("plot: map series '" + spec.z + "' length " +
                                  std::to_string(zs.values.size()) + " != nx*ny = " +
                                  std::to_string(nx * ny));
        Frame f{70, 30, W - 170, H - 80, span_of(xs.values), span_of(ys.values)};
        Range zr{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (double v : zs.values) zr.include(v);
        if (!(zr.lo <= zr.hi)) throw ValidationError("plot: map has no finite values");
        if (zr.lo == zr.hi) zr.hi = zr.lo + 1.0;

        const double cw = f.w / static_cast<double>(nx);
        const double chh = f.h / static_cast<double>(ny);
        for (std::size_t iy = 0; iy < ny; ++iy) {
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const double v = zs.values[iy * nx + ix];
                const std::string color = std::isfinite(v)
                    ? hex_color(colormap((v - zr.lo) / (zr.hi - zr.lo)))
                    : std::string("#cccccc");
                s += "<rect x=\"" + px(f.x0 + cw * ix) + "\" y=\"" +
                     px(f.y0 + f.h - chh * (iy + 1)) + "\" width=\"" + px(cw + 0.5) +
                     "\" height=\"" + px(chh + 0.5) + "\" fill=\"" + color + "\"/>\n";
            }
        }
        draw_axes(s, f, label_of(spec.x, xs.unit), label_of(spec.y_axis, ys.unit), spec.title);

        // colorbar
        const double bx = f.x0 + f.w + 24, bw = 18, bh = f.h;
        const int nseg = 64;
        for (int i = 0; i < nseg; ++i) {
            const double t = (i + 0.5) / nseg;
            s += "<rect x=\"" + px(bx) + "\" y=\"" + px(f.y0 + bh - bh * (i + 1.0) / nseg) +
                 "\" width=\"" + px(bw) + "\" height=\"" + px(bh / nseg + 0.5) +
                 "\" fill=\"" + hex_color(colormap(t)) + "\"/>\n";
        }
        s += "<rect x=\"" + px(bx) + "\" y=\"" + px(f.y0) + "\" width=\"" + px(bw) +
             "\" height=\"" + px(bh) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
        for (int i = 0; i <= 2; ++i) {
            const double v = zr.lo + (zr.hi - zr.lo) * i / 2.0;
            s += "<text x=\"" + px(bx + bw + 4) + "\" y=\"" + px(f.y0 + bh - bh * i / 2.0 + 4) +
                 "\" font-size=\"11\">" + num(v) + "</text>\n";
        }
        s += "<text x=\"" + px(bx + bw / 2) + "\" y=\"" + px(f.y0 - 8) +
             "\" font-size=\"11\" text-anchor=\"middle\">" +
             (zs.unit.empty() ? spec.z : zs.unit) + "</text>\n";
    }

    s += "</svg>\n";
    return s;
}

} // namespace jpakit::plot
