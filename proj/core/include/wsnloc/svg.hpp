#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wsnloc/geometry.hpp"

namespace wsnloc {

// Static SVG renderings. Markers carry a class attribute (true, est, anchor,
// err, point) so files can be inspected by scripts.

struct FieldPlot {
    Box field;
    std::vector<Vec2> truth;
    std::vector<Vec2> estimates;  // ignored for anchors
    std::vector<bool> is_anchor;
};

struct ParetoPoint {
    double anchors = 0.0;
    double error_m = 0.0;
};

std::string field_svg(const FieldPlot& plot);
std::string pareto_svg(std::span<const ParetoPoint> points);
/// One polyline vertex per entry of `errors` (iterations 1..n).
std::string convergence_svg(std::span<const double> errors);

/// Throws IoError when the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace wsnloc
