#pragma once

// key = value configuration file. Blank lines and lines starting with '#'
// are ignored. Recognised keys:
//   port = 8099
//   histogram_bins = 64
//   impact.default = 1.0
//   impact.<gid:sid> = <I >= 0>
//   description.<gid:sid> = free text

#include <fstream>
#include <map>
#include <string>

#include "alarm.hpp"
#include "error.hpp"
#include "leakage.hpp"

namespace privleak {

struct ToolConfig {
    int port = 8099;
    std::size_t histogram_bins = 64;
    ImpactMap impacts;
    std::map<std::string, std::string> descriptions;
};

namespace detail {
inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& where) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::format, where + ": '" + v + "' is not a number");
}
} // namespace detail

inline ToolConfig parse_config(std::istream& in, const std::string& name = "config") {
    ToolConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        const std::string where = name + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw Error(ErrorKind::format, where + ": expected key = value");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (key == "port") {
            cfg.port = static_cast<int>(detail::parse_double(value, where));
        } else if (key == "histogram_bins") {
            const double bins = detail::parse_double(value, where);
            if (bins < 1) throw Error(ErrorKind::format, where + ": histogram_bins must be >= 1");
            cfg.histogram_bins = static_cast<std::size_t>(bins);
        } else if (key == "impact.default") {
            cfg.impacts.fallback = detail::parse_double(value, where);
            if (cfg.impacts.fallback < 0) throw Error(ErrorKind::format, where + ": impact must be >= 0");
        } else if (key.rfind("impact.", 0) == 0) {
            const auto rule = key.substr(7);
            if (!is_valid_rule_id(rule)) throw Error(ErrorKind::format, where + ": bad rule id '" + rule + "'");
            const double impact = detail::parse_double(value, where);
            if (impact < 0) throw Error(ErrorKind::format, where + ": impact must be >= 0");
            cfg.impacts.by_rule[rule] = impact;
        } else if (key.rfind("description.", 0) == 0) {
            cfg.descriptions[key.substr(12)] = value;
        } else {
            throw Error(ErrorKind::format, where + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

inline ToolConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot read " + path);
    return parse_config(in, path);
}

} // namespace privleak
