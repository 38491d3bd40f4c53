#pragma once

// Per-rule leakage statistics over a series of alarm entropies, ruleset
// aggregation, and the anonymisation what-if arithmetic.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "alarm.hpp"
#include "entropy.hpp"
#include "error.hpp"

namespace privleak {

struct EntropySeries {
    std::string rule_id;
    EntropyConfig config;
    std::vector<std::size_t> alarm_index; // position within the rule's alarm list
    std::vector<double> values;
    std::size_t skipped_empty = 0;     // zero-length payloads, no entropy
    std::size_t skipped_too_short = 0; // octet correction undefined (n = 1)
    std::size_t below_floor = 0;       // included, but shorter than the reliability floor

    std::size_t size() const { return values.size(); }
};

inline EntropySeries build_series(const RuleAlarmSet& set, const EntropyConfig& cfg) {
    EntropySeries s;
    s.rule_id = set.rule_id;
    s.config = cfg;
    for (std::size_t i = 0; i < set.alarms.size(); ++i) {
        const auto& payload = set.alarms[i].payload;
        if (payload.empty()) {
            ++s.skipped_empty;
            continue;
        }
        if (!entropy_defined(payload.size(), cfg)) {
            ++s.skipped_too_short;
            continue;
        }
        if (payload.size() < reliability_floor_octets) ++s.below_floor;
        s.alarm_index.push_back(i);
        s.values.push_back(entropy(payload, cfg).value);
    }
    return s;
}

inline double mean_entropy(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorKind::undefined_input, "mean of an empty series");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

inline bool constant(std::span<const double> values) {
    return !values.empty() && std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; });
}

/// Middle value; average of the two middle values for even N.
inline double median_entropy(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorKind::undefined_input, "median of an empty series");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Deviation of alarm `j` (0-based) from the series mean.
inline double alarm_leakage(std::span<const double> values, std::size_t j) {
    if (j >= values.size()) throw Error(ErrorKind::index, "alarm index out of range");
    return values[j] - mean_entropy(values);
}

/// Sample standard deviation, N-1 divisor.
inline double sigma_normal(std::span<const double> values) {
    if (values.size() < 2) throw Error(ErrorKind::insufficient_sample, "sigma_normal needs N >= 2");
    if (constant(values)) return 0.0; // the mean of equal doubles need not equal them
    const double mean = mean_entropy(values);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

/// sqrt(2) times the mean absolute deviation from the mean.
inline double sigma_laplace(std::span<const double> values) {
    if (constant(values)) return 0.0;
    const double mean = mean_entropy(values);
    double sad = 0.0;
    for (double v : values) sad += std::abs(v - mean);
    return std::sqrt(2.0) * sad / static_cast<double>(values.size());
}

inline double privacy_leakage(double sigma, double impact) {
    if (!(impact >= 0.0)) throw Error(ErrorKind::domain, "privacy impact must be >= 0");
    return impact * sigma;
}

inline double total_leakage(double alarms, double sigma) { return alarms * sigma; }

struct AggregateEntry {
    std::string rule_id;
    double alarms = 0; // N_i
    double sigma = 0;

    bool operator==(const AggregateEntry&) const = default;
};

/// Alarm-count weighted mean of per-rule sigma.
inline double aggregate_sigma(std::span<const AggregateEntry> entries) {
    if (entries.empty()) throw Error(ErrorKind::undefined_input, "aggregate over an empty ruleset");
    double weighted = 0.0, total = 0.0;
    for (const auto& e : entries) {
        if (!(e.alarms >= 1.0)) throw Error(ErrorKind::domain, "rule " + e.rule_id + " has N < 1");
        if (!(e.sigma >= 0.0)) throw Error(ErrorKind::domain, "rule " + e.rule_id + " has sigma < 0");
        weighted += e.alarms * e.sigma;
        total += e.alarms;
    }
    return weighted / total;
}

struct WhatIfAction {
    enum class Kind { remove, anonymize };
    Kind kind;
    std::string rule_id;
};

struct WhatIfResult {
    double before = 0;
    double after = 0;
    std::vector<AggregateEntry> entries; // ruleset after the actions
};

/// Applies the actions in order. `remove` drops the rule (its alarms are no
/// longer reported); `anonymize` keeps N_i but sets sigma_i to 0.
inline WhatIfResult whatif(std::vector<AggregateEntry> entries, std::span<const WhatIfAction> actions) {
    WhatIfResult r;
    r.before = aggregate_sigma(entries);
    for (const auto& act : actions) {
        auto it = std::find_if(entries.begin(), entries.end(),
                               [&](const AggregateEntry& e) { return e.rule_id == act.rule_id; });
        if (it == entries.end()) throw Error(ErrorKind::not_found, "unknown rule_id " + act.rule_id);
        if (act.kind == WhatIfAction::Kind::remove)
            entries.erase(it);
        else
            it->sigma = 0.0;
    }
    r.after = aggregate_sigma(entries);
    r.entries = std::move(entries);
    return r;
}

struct RuleLeakage {
    std::string rule_id;
    std::size_t alarms = 0;  // alarms with a defined entropy (N)
    std::size_t skipped = 0; // alarms without one
    std::size_t below_floor = 0;
    double mean = 0;
    double median = 0;
    double sigma_normal = 0;
    double sigma_laplace = 0;
    double leakage_min = 0; // most negative deviation from the mean
    double leakage_max = 0;
    double impact = 1.0;
    double privacy = 0; // impact * sigma_laplace
    bool scored = false; // false when N < 2
};

inline RuleLeakage rule_leakage(const EntropySeries& s, double impact) {
    RuleLeakage r;
    r.rule_id = s.rule_id;
    r.alarms = s.size();
    r.skipped = s.skipped_empty + s.skipped_too_short;
    r.below_floor = s.below_floor;
    r.impact = impact;
    if (s.values.empty()) return r;
    r.mean = mean_entropy(s.values);
    r.median = median_entropy(s.values);
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    r.leakage_min = *lo - r.mean;
    r.leakage_max = *hi - r.mean;
    if (s.size() < 2) return r;
    r.sigma_normal = sigma_normal(s.values);
    r.sigma_laplace = sigma_laplace(s.values);
    r.privacy = privacy_leakage(r.sigma_laplace, impact);
    r.scored = true;
    return r;
}

/// rule_id -> privacy impact I; rules not listed use `fallback`.
struct ImpactMap {
    std::map<std::string, double> by_rule;
    double fallback = 1.0;

    double of(const std::string& rule_id) const {
        auto it = by_rule.find(rule_id);
        return it == by_rule.end() ? fallback : it->second;
    }
};

struct LeakageReport {
    EntropyConfig config;
    std::vector<RuleLeakage> rules; // sorted by sigma_laplace, descending
    std::optional<double> sigma_all;
    std::optional<double> sigma_all_normal;
    std::map<std::string, std::string> descriptions;

    std::vector<AggregateEntry> aggregate_entries() const {
        std::vector<AggregateEntry> out;
        for (const auto& r : rules)
            if (r.scored) out.push_back({r.rule_id, static_cast<double>(r.alarms), r.sigma_laplace});
        return out;
    }
};

/// Scores every rule in the store. Rules are independent and may be spread
/// over `jobs` threads; output order does not depend on `jobs`.
inline LeakageReport analyze(const AlarmStore& store, const EntropyConfig& cfg, const ImpactMap& impacts = {},
                             unsigned jobs = 1) {
    std::vector<const RuleAlarmSet*> sets;
    for (const auto& [_, set] : store.rules()) sets.push_back(&set);

    LeakageReport report;
    report.config = cfg;
    report.rules.resize(sets.size());
    auto work = [&](std::size_t begin, std::size_t step) {
        for (std::size_t i = begin; i < sets.size(); i += step)
            report.rules[i] = rule_leakage(build_series(*sets[i], cfg), impacts.of(sets[i]->rule_id));
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(sets.size())));
    if (jobs == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(work, t, jobs);
    }

    std::stable_sort(report.rules.begin(), report.rules.end(), [](const RuleLeakage& a, const RuleLeakage& b) {
        if (a.scored != b.scored) return a.scored;
        if (a.sigma_laplace != b.sigma_laplace) return a.sigma_laplace > b.sigma_laplace;
        return a.rule_id < b.rule_id;
    });

    auto entries = report.aggregate_entries();
    if (!entries.empty()) {
        report.sigma_all = aggregate_sigma(entries);
        for (std::size_t i = 0; i < entries.size(); ++i) entries[i].sigma = report.rules[i].sigma_normal;
        report.sigma_all_normal = aggregate_sigma(entries);
    }
    return report;
}

} // namespace privleak
