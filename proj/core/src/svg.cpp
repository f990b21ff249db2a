#include "wsnloc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "wsnloc/errors.hpp"

namespace wsnloc {

namespace {

constexpr double kSize = 480.0;
constexpr double kMargin = 48.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string header() {
    const std::string s = num(kSize + 2 * kMargin);
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + s + "\" height=\"" + s + "\" viewBox=\"0 0 " + s +
           " " + s + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

// Maps data coordinates onto the plot square, y pointing up.
struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kMargin + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * kSize; }
    double py(double y) const { return kMargin + kSize - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * kSize; }
};

std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
    std::string s;
    s += "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" + num(kSize) + "\" height=\"" +
         num(kSize) + "\" fill=\"none\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(kMargin + kSize / 2) + "\" y=\"" + num(kSize + 1.75 * kMargin) +
         "\" text-anchor=\"middle\" font-size=\"14\">" + xlabel + "</text>\n";
    s += "<text x=\"" + num(kMargin / 3) + "\" y=\"" + num(kMargin + kSize / 2) +
         "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 " + num(kMargin / 3) + " " +
         num(kMargin + kSize / 2) + ")\">" + ylabel + "</text>\n";
    auto tick = [&](double x, double y, const std::string& label, const char* anchor) {
        s += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\" font-size=\"10\">" +
             label + "</text>\n";
    };
    tick(f.px(f.x0), kMargin + kSize + 14, num(f.x0), "middle");
    tick(f.px(f.x1), kMargin + kSize + 14, num(f.x1), "middle");
    tick(kMargin - 4, f.py(f.y0), num(f.y0), "end");
    tick(kMargin - 4, f.py(f.y1), num(f.y1), "end");
    return s;
}

}  // namespace

std::string field_svg(const FieldPlot& plot) {
    if (plot.truth.empty()) throw ArgumentError("field plot needs at least one node");
    if (plot.estimates.size() != plot.truth.size()) throw ArgumentError("one estimate per node required");
    const Frame f{plot.field.xmin, plot.field.xmax, plot.field.ymin, plot.field.ymax};
    std::string s = header() + axes(f, "x_m", "y_m");
    auto anchor = [&](std::size_t i) { return i < plot.is_anchor.size() && plot.is_anchor[i]; };
    for (std::size_t i = 0; i < plot.truth.size(); ++i) {
        if (anchor(i)) continue;
        s += "<line class=\"err\" x1=\"" + num(f.px(plot.truth[i].x)) + "\" y1=\"" + num(f.py(plot.truth[i].y)) +
             "\" x2=\"" + num(f.px(plot.estimates[i].x)) + "\" y2=\"" + num(f.py(plot.estimates[i].y)) +
             "\" stroke=\"gray\" stroke-width=\"0.8\"/>\n";
    }
    for (std::size_t i = 0; i < plot.truth.size(); ++i) {
        const Vec2 t = plot.truth[i];
        if (anchor(i)) {
            const double x = f.px(t.x), y = f.py(t.y);
            s += "<rect class=\"anchor\" x=\"" + num(x - 4) + "\" y=\"" + num(y - 4) +
                 "\" width=\"8\" height=\"8\" fill=\"red\"/>\n";
            continue;
        }
        s += "<circle class=\"true\" cx=\"" + num(f.px(t.x)) + "\" cy=\"" + num(f.py(t.y)) +
             "\" r=\"3\" fill=\"blue\"/>\n";
        const Vec2 e = plot.estimates[i];
        s += "<circle class=\"est\" cx=\"" + num(f.px(e.x)) + "\" cy=\"" + num(f.py(e.y)) +
             "\" r=\"3\" fill=\"none\" stroke=\"green\"/>\n";
    }
    return s + "</svg>\n";
}

std::string pareto_svg(std::span<const ParetoPoint> points) {
    if (points.empty()) throw ArgumentError("pareto plot needs at least one point");
    Frame f{points[0].anchors, points[0].anchors, 0.0, points[0].error_m};
    for (const auto& p : points) {
        f.x0 = std::min(f.x0, p.anchors);
        f.x1 = std::max(f.x1, p.anchors);
        f.y1 = std::max(f.y1, p.error_m);
    }
    f.x0 -= 1.0;
    f.x1 += 1.0;
    f.y1 = f.y1 > 0.0 ? 1.1 * f.y1 : 1.0;
    std::string s = header() + axes(f, "anchors", "error_m");
    for (const auto& p : points)
        s += "<circle class=\"point\" cx=\"" + num(f.px(p.anchors)) + "\" cy=\"" + num(f.py(p.error_m)) +
             "\" r=\"4\" fill=\"black\"/>\n";
    return s + "</svg>\n";
}

std::string convergence_svg(std::span<const double> errors) {
    if (errors.empty()) throw ArgumentError("convergence plot needs at least one iteration");
    const double top = *std::max_element(errors.begin(), errors.end());
    const Frame f{1.0, static_cast<double>(errors.size()), 0.0, top > 0.0 ? 1.1 * top : 1.0};
    std::string s = header() + axes(f, "iteration", "error_m");
    s += "<polyline fill=\"none\" stroke=\"black\" points=\"";
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (i) s += ' ';
        s += num(f.px(static_cast<double>(i + 1))) + "," + num(f.py(errors[i]));
    }
    return s + "\"/>\n</svg>\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace wsnloc
