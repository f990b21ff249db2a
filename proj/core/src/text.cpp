#include "wsnloc/text.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "wsnloc/errors.hpp"

namespace wsnloc {

namespace {

std::string at_line(std::size_t line_no) {
    return line_no ? " (line " + std::to_string(line_no) + ")" : std::string{};
}

}  // namespace

std::string format_exact(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::string format_fixed6(double v) {
    char buf[64];
    // Avoid emitting "-0.000000".
    if (std::abs(v) < 5e-7) v = 0.0;
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.emplace_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<std::pair<std::string, std::string>> parse_key_value(std::string_view line,
                                                                   std::size_t line_no) {
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) return std::nullopt;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(std::string(line), "expected 'key = value'" + at_line(line_no));
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", "empty key" + at_line(line_no));
    return std::make_pair(std::move(key), std::move(value));
}

double parse_real(const std::string& key, std::string_view value, std::size_t line_no) {
    const std::string text(value);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v))
        throw ConfigError(key, "key '" + key + "' expects a real number, got '" + text + "'" +
                                   at_line(line_no));
    return v;
}

std::uint64_t parse_uint(const std::string& key, std::string_view value, std::size_t line_no) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(key, "key '" + key + "' expects a non-negative integer, got '" +
                                   std::string(value) + "'" + at_line(line_no));
    return v;
}

}  // namespace wsnloc
