#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wsnloc {

/// Shortest decimal that parses back to the same double.
std::string format_exact(double v);
/// Fixed six decimals, as used by every CSV artifact.
std::string format_fixed6(double v);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Parses `key = value`, ignoring blank lines and `#` comments.
/// Lines without '=' raise ConfigError.
std::optional<std::pair<std::string, std::string>> parse_key_value(std::string_view line,
                                                                   std::size_t line_no);

double parse_real(const std::string& key, std::string_view value, std::size_t line_no);
std::uint64_t parse_uint(const std::string& key, std::string_view value, std::size_t line_no);

}  // namespace wsnloc
