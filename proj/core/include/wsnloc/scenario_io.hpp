#pragma once

#include <filesystem>
#include <iosfwd>

#include "wsnloc/field.hpp"

namespace wsnloc {

/// A scenario plus the measurement model it is meant to be ranged with.
///
/// Text format, one `key = value` per line, `#` starts a comment:
///
///     width = 100
///     height = 100
///     radius = 15
///     noise_sigma = 1
///     seed = 42
///     node = 0,12.5,80.25,0
///     node = 1,0,0,1
///
/// `node` lines carry `id,x,y,anchor_flag` and must appear in id order.
/// Reals are written in shortest round-trip form, so write -> read is exact.
struct ScenarioFile {
    FieldScenario scenario;
    MeasurementModel model;
};

void write_scenario(std::ostream& os, const ScenarioFile& file);
void write_scenario(const std::filesystem::path& path, const ScenarioFile& file);

/// Throws ConfigError naming the offending key (with line number).
ScenarioFile read_scenario(std::istream& is);
ScenarioFile read_scenario(const std::filesystem::path& path);

}  // namespace wsnloc
