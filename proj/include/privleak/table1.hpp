#pragma once

// Measured per-rule leakage from a 2009-2011 Snort deployment: length
// corrected standard deviation of Shannon octet entropy, 32 noisiest rules.
// The raw alarms are private, so these rows feed the aggregation and
// what-if arithmetic only.

#include <array>
#include <optional>
#include <string_view>

namespace privleak {

struct Table1Row {
    std::string_view rule_id;
    long alarms;
    int clusters;
    double sigma_normal;
    double sigma_laplace;
    std::string_view description;
};

inline constexpr std::array<Table1Row, 32> table1_rows{{
    {"1:1394000", 95096, 1, 6.71, 6.70, "Samples random traffic"},
    {"119:14", 3104, 1, 4.10, 3.49, "http_inspect non-standard characters in web request"},
    {"1:402", 36224, 1, 2.34, 2.73, "ICMP Destination Port unreachable"},
    {"1:1201", 680, 1, 1.96, 1.77, "HTTP 403 Forbidden"},
    {"119:15", 720, 1, 1.40, 1.02, "http_inspect over-long URL"},
    {"1:1394", 1384, 2, 0.90, 0.97, "Shellcode x86 NOP AAAAAA"},
    {"119:4", 576, 1, 1.24, 0.91, "http_inspect preprocessor (IIS decoding attacks)"},
    {"1:1852", 10392, 1, 0.96, 0.75, "robots.txt access"},
    {"1:1463", 288, 1, 0.80, 0.72, "IRC Chat"},
    {"119:2", 21744, 2, 0.58, 0.61, "http_inspect double encoded characters"},
    {"1:399", 631840, 1, 1.02, 0.58, "ICMP Host unreachable"},
    {"119:7", 1520, 2, 0.48, 0.43, "http_inspect unicode encoded web request"},
    {"1:12592", 312, 1, 0.33, 0.40, "SMTP command injection attempt"},
    {"1:2925", 12960, 2, 0.42, 0.35, "1x1 GIF attempt (web bug)"},
    {"1:1560", 360, 2, 0.27, 0.30, "WEB-MISC /doc access"},
    {"1:486", 368, 1, 0.37, 0.27, "ICMP Destination Unreachable"},
    {"128:4", 306616, 3, 0.25, 0.27, "spp_ssh"},
    {"119:18", 22760, 2, 0.32, 0.18, "http_inspect directory traversal outside web server root."},
    {"122:1", 576, 2, 0.08, 0.10, "sfPortscan preprocessor (tcp portsweep)"},
    {"122:3", 2088, 1, 0.09, 0.09, "sfPortscan preprocessor (tcp portsweep)"},
    {"1:384", 566016, 4, 0.04, 0.08, "ICMP Ping (general)"},
    {"1:1437", 1056, 2, 0.08, 0.08, "MULTIMEDIA Windows Media download"},
    {"1:408", 205904, 3, 0.04, 0.04, "ICMP Echo Reply"},
    {"1:366", 202552, 1, 0.04, 0.04, "ICMP Ping *NIX"},
    {"1:368", 202552, 1, 0.04, 0.04, "ICMP Ping BSD"},
    {"1:11969", 2896, 3, 0.03, 0.03, "VOIP-SIP inbound 401 Unauthorized"},
    {"1:385", 4392, 2, 0.04, 0.03, "ICMP traceroute"},
    {"1:382", 2192, 1, 0.00, 0.00, "ICMP Ping Windows (alphabet)"},
    {"1:2050", 32024, 1, 0.00, 0.00, "SQL Version Overflow attempt."},
    {"1:2003", 1777264, 1, 0.00, 0.00, "SQL Worm Propagation attempt."},
    {"105:2", 192, 2, 0.00, 0.00, "BO traffic (spp_bo)"},
    {"106:4", 464, 3, 0.00, 0.00, "spp_rpc_decode preprocessor - e.g. incomplete RPC segment."},}};

inline const std::array<Table1Row, 32>& load_table1_fixture() { return table1_rows; }

inline std::optional<Table1Row> table1_lookup(std::string_view rule_id) {
    for (const auto& row : table1_rows)
        if (row.rule_id == rule_id) return row;
    return std::nullopt;
}

} // namespace privleak
