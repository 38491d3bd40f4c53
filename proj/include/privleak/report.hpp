#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "leakage.hpp"

namespace privleak {

inline nlohmann::ordered_json to_json(const EntropyConfig& c) {
    return {{"algorithm", to_string(c.algorithm)},
            {"symbol", to_string(c.symbol)},
            {"normalized", c.normalized},
            {"length_corrected", c.length_corrected}};
}

inline EntropyConfig config_from_json(const nlohmann::json& j) {
    EntropyConfig c;
    if (j.contains("algorithm")) c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (j.contains("symbol")) c.symbol = parse_symbol(j.at("symbol").get<std::string>());
    if (j.contains("normalized")) c.normalized = j.at("normalized").get<bool>();
    if (j.contains("length_corrected")) c.length_corrected = j.at("length_corrected").get<bool>();
    return c;
}

inline nlohmann::ordered_json to_json(const RuleLeakage& r) {
    nlohmann::ordered_json j;
    j["rule_id"] = r.rule_id;
    j["alarms"] = r.alarms;
    j["skipped"] = r.skipped;
    j["below_floor"] = r.below_floor;
    j["scored"] = r.scored;
    j["mean"] = r.mean;
    j["median"] = r.median;
    j["sigma_normal"] = r.scored ? nlohmann::ordered_json(r.sigma_normal) : nlohmann::ordered_json(nullptr);
    j["sigma_laplace"] = r.scored ? nlohmann::ordered_json(r.sigma_laplace) : nlohmann::ordered_json(nullptr);
    j["leakage_min"] = r.leakage_min;
    j["leakage_max"] = r.leakage_max;
    j["impact"] = r.impact;
    j["privacy"] = r.scored ? nlohmann::ordered_json(r.privacy) : nlohmann::ordered_json(nullptr);
    j["total_leakage"] = total_leakage(static_cast<double>(r.alarms), r.sigma_laplace);
    return j;
}

inline nlohmann::ordered_json to_json(const LeakageReport& rep) {
    nlohmann::ordered_json j;
    j["config"] = to_json(rep.config);
    j["rules"] = nlohmann::ordered_json::array();
    for (const auto& r : rep.rules) {
        auto row = to_json(r);
        if (auto it = rep.descriptions.find(r.rule_id); it != rep.descriptions.end()) row["description"] = it->second;
        j["rules"].push_back(std::move(row));
    }
    j["sigma_all"] = rep.sigma_all ? nlohmann::ordered_json(*rep.sigma_all) : nlohmann::ordered_json(nullptr);
    j["sigma_all_normal"] =
        rep.sigma_all_normal ? nlohmann::ordered_json(*rep.sigma_all_normal) : nlohmann::ordered_json(nullptr);
    return j;
}

/// Plain-text table: SID, Alarms, Clusters, sigma, sigma^L, I, pi, Description.
inline std::string to_table(const LeakageReport& rep) {
    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof buf, "# metric: %s\n", describe(rep.config).c_str());
    out += buf;
    std::snprintf(buf, sizeof buf, "%-12s %10s %8s %10s %10s %6s %10s  %s\n", "SID", "Alarms", "Clusters", "sigma1",
                  "sigma1_L", "I", "pi", "Description");
    out += buf;
    for (const auto& r : rep.rules) {
        std::string desc;
        if (auto it = rep.descriptions.find(r.rule_id); it != rep.descriptions.end()) desc = it->second;
        if (r.below_floor) desc += (desc.empty() ? "" : " ") + std::string("[") + std::to_string(r.below_floor) + " below floor]";
        if (r.skipped) desc += (desc.empty() ? "" : " ") + std::string("[") + std::to_string(r.skipped) + " skipped]";
        if (r.scored)
            std::snprintf(buf, sizeof buf, "%-12s %10zu %8d %10.4f %10.4f %6.2f %10.4f  %s\n", r.rule_id.c_str(),
                          r.alarms, 1, r.sigma_normal, r.sigma_laplace, r.impact, r.privacy, desc.c_str());
        else
            std::snprintf(buf, sizeof buf, "%-12s %10zu %8d %10s %10s %6.2f %10s  %s\n", r.rule_id.c_str(), r.alarms,
                          1, "-", "-", r.impact, "-", desc.c_str());
        out += buf;
    }
    if (rep.sigma_all)
        std::snprintf(buf, sizeof buf, "sigma_all (alarm-weighted): sigma1_L=%.4f sigma1=%.4f\n", *rep.sigma_all,
                      *rep.sigma_all_normal);
    else
        std::snprintf(buf, sizeof buf, "sigma_all (alarm-weighted): -\n");
    out += buf;
    return out;
}

} // namespace privleak
