#include "wsnloc/scenario_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "wsnloc/errors.hpp"
#include "wsnloc/text.hpp"

namespace wsnloc {

void write_scenario(std::ostream& os, const ScenarioFile& file) {
    const auto& s = file.scenario;
    os << "# wsnloc scenario\n";
    os << "width = " << format_exact(s.width) << '\n';
    os << "height = " << format_exact(s.height) << '\n';
    os << "radius = " << format_exact(s.radius) << '\n';
    os << "noise_sigma = " << format_exact(file.model.noise_sigma) << '\n';
    os << "seed = " << s.rng_seed << '\n';
    for (const auto& n : s.nodes) {
        os << "node = " << n.id << ',' << format_exact(n.true_pos.x) << ','
           << format_exact(n.true_pos.y) << ',' << (n.is_anchor ? 1 : 0) << '\n';
    }
}

void write_scenario(const std::filesystem::path& path, const ScenarioFile& file) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    write_scenario(os, file);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

ScenarioFile read_scenario(std::istream& is) {
    ScenarioFile out;
    auto& s = out.scenario;
    std::map<std::string, std::size_t> seen;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        auto kv = parse_key_value(raw, line_no);
        if (!kv) continue;
        const auto& [key, value] = *kv;
        const std::string where = " (line " + std::to_string(line_no) + ")";
        if (key != "node") {
            if (auto it = seen.find(key); it != seen.end())
                throw ConfigError(key, "duplicate key '" + key + "'" + where + ", first defined on line " +
                                           std::to_string(it->second));
            seen.emplace(key, line_no);
        }
        if (key == "width") {
            s.width = parse_real(key, value, line_no);
        } else if (key == "height") {
            s.height = parse_real(key, value, line_no);
        } else if (key == "radius") {
            s.radius = parse_real(key, value, line_no);
        } else if (key == "noise_sigma") {
            out.model.noise_sigma = parse_real(key, value, line_no);
        } else if (key == "seed") {
            s.rng_seed = parse_uint(key, value, line_no);
        } else if (key == "node") {
            const auto fields = split(value, ',');
            if (fields.size() != 4)
                throw ConfigError(key, "node expects id,x,y,anchor_flag" + where);
            NodeRecord n;
            n.id = parse_uint(key, fields[0], line_no);
            n.true_pos = {parse_real(key, fields[1], line_no), parse_real(key, fields[2], line_no)};
            const auto flag = parse_uint(key, fields[3], line_no);
            if (flag > 1) throw ConfigError(key, "anchor_flag must be 0 or 1" + where);
            n.is_anchor = flag == 1;
            if (n.id != s.nodes.size())
                throw ConfigError(key, "node ids must be dense and in order" + where);
            s.nodes.push_back(n);
        } else {
            throw ConfigError(key, "unknown key '" + key + "'" + where);
        }
    }
    for (const char* required : {"width", "height", "radius", "seed"})
        if (!seen.contains(required))
            throw ConfigError(required, std::string("missing key '") + required + "'");
    try {
        s.validate();
        out.model.validate();
    } catch (const std::exception& e) {
        throw ConfigError("node", e.what());
    }
    return out;
}

ScenarioFile read_scenario(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    return read_scenario(is);
}

}  // namespace wsnloc
