#pragma once

// Alarm data model and file ingestion.
//
// Interchange format is JSON-lines, one alarm per line:
//   {"rule_id":"1:2003","ts":1262304000,"payload_hex":"9090..."}
// CSV with header `rule_id,ts,payload_hex` is accepted as well. Bad records
// are counted in the manifest and skipped; only file-level problems throw.

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace privleak {

using Bytes = std::vector<std::uint8_t>;

/// `<digits>:<digits>`, both parts non-empty.
inline bool is_valid_rule_id(std::string_view id) {
    const auto colon = id.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == id.size()) return false;
    for (std::size_t i = 0; i < id.size(); ++i) {
        if (i == colon) continue;
        if (id[i] < '0' || id[i] > '9') return false;
    }
    return true;
}

inline std::optional<Bytes> decode_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) return std::nullopt;
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const int hi = nibble(hex[i]);
        const int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

inline std::string encode_hex(const Bytes& bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

struct Alarm {
    std::string rule_id;
    std::int64_t timestamp = 0; // informational only
    Bytes payload;

    std::size_t length() const { return payload.size(); }
    bool operator==(const Alarm&) const = default;
};

struct RuleAlarmSet {
    std::string rule_id;
    std::vector<Alarm> alarms;

    std::size_t count() const { return alarms.size(); }
    bool operator==(const RuleAlarmSet&) const = default;
};

struct SourceRecord {
    std::string path;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::vector<std::string> errors; // first few, "line N: message"
};

class AlarmStore {
public:
    static constexpr std::size_t max_reported_errors = 20;

    AlarmStore() = default;
    AlarmStore(const AlarmStore& other) {
        std::lock_guard lock(other.mutex_);
        rules_ = other.rules_;
        manifest_ = other.manifest_;
    }
    AlarmStore& operator=(const AlarmStore& other) {
        if (this == &other) return *this;
        std::scoped_lock lock(mutex_, other.mutex_);
        rules_ = other.rules_;
        manifest_ = other.manifest_;
        return *this;
    }
    AlarmStore(AlarmStore&& other) noexcept
        : rules_(std::move(other.rules_)), manifest_(std::move(other.manifest_)) {}
    AlarmStore& operator=(AlarmStore&& other) noexcept {
        rules_ = std::move(other.rules_);
        manifest_ = std::move(other.manifest_);
        return *this;
    }

    void add(Alarm alarm) {
        std::lock_guard lock(mutex_);
        auto& set = rules_[alarm.rule_id];
        set.rule_id = alarm.rule_id;
        set.alarms.push_back(std::move(alarm));
    }

    /// Appends another store (typically one file's delta). Serialized.
    void merge(AlarmStore delta) {
        std::lock_guard lock(mutex_);
        for (auto& [id, set] : delta.rules_) {
            auto& mine = rules_[id];
            mine.rule_id = id;
            for (auto& a : set.alarms) mine.alarms.push_back(std::move(a));
        }
        for (auto& rec : delta.manifest_) manifest_.push_back(std::move(rec));
    }

    void record_source(SourceRecord rec) {
        std::lock_guard lock(mutex_);
        manifest_.push_back(std::move(rec));
    }

    const std::map<std::string, RuleAlarmSet>& rules() const { return rules_; }
    const std::vector<SourceRecord>& manifest() const { return manifest_; }

    const RuleAlarmSet* find(const std::string& rule_id) const {
        auto it = rules_.find(rule_id);
        return it == rules_.end() ? nullptr : &it->second;
    }

    std::size_t total_alarms() const {
        std::size_t n = 0;
        for (const auto& [_, set] : rules_) n += set.count();
        return n;
    }

    bool empty() const { return rules_.empty(); }

    /// Content equality; the manifest is provenance and is ignored.
    bool same_contents(const AlarmStore& other) const { return rules_ == other.rules_; }

private:
    mutable std::mutex mutex_;
    std::map<std::string, RuleAlarmSet> rules_;
    std::vector<SourceRecord> manifest_;
};

namespace detail {

inline void note_error(SourceRecord& rec, std::size_t line, const std::string& msg) {
    ++rec.rejected;
    if (rec.errors.size() < AlarmStore::max_reported_errors)
        rec.errors.push_back("line " + std::to_string(line) + ": " + msg);
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + path);
    return in;
}

inline void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline bool blank(const std::string& line) {
    return line.find_first_not_of(" \t") == std::string::npos;
}

/// Validates the three fields and produces an Alarm, or an error message.
inline std::optional<Alarm> make_alarm(const std::string& rule_id, std::int64_t ts,
                                       const std::string& hex, std::string& err) {
    if (!is_valid_rule_id(rule_id)) {
        err = "rule_id '" + rule_id + "' is not <gid>:<sid>";
        return std::nullopt;
    }
    auto payload = decode_hex(hex);
    if (!payload) {
        err = hex.size() % 2 ? "payload_hex has odd length" : "payload_hex has non-hex characters";
        return std::nullopt;
    }
    return Alarm{rule_id, ts, std::move(*payload)};
}

} // namespace detail

/// Parses one JSON-lines stream. `name` only labels the manifest entry.
inline AlarmStore ingest_jsonl_stream(std::istream& in, const std::string& name) {
    AlarmStore delta;
    SourceRecord rec{name, 0, 0, {}};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (detail::blank(line)) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            detail::note_error(rec, lineno, "not valid JSON");
            continue;
        }
        if (!j.is_object() || !j.contains("rule_id") || !j["rule_id"].is_string() ||
            !j.contains("payload_hex") || !j["payload_hex"].is_string()) {
            detail::note_error(rec, lineno, "missing rule_id or payload_hex");
            continue;
        }
        std::int64_t ts = 0;
        if (j.contains("ts")) {
            if (!j["ts"].is_number()) {
                detail::note_error(rec, lineno, "ts is not a number");
                continue;
            }
            ts = j["ts"].get<std::int64_t>();
        }
        std::string err;
        auto alarm = detail::make_alarm(j["rule_id"].get<std::string>(), ts,
                                        j["payload_hex"].get<std::string>(), err);
        if (!alarm) {
            detail::note_error(rec, lineno, err);
            continue;
        }
        delta.add(std::move(*alarm));
        ++rec.accepted;
    }
    delta.record_source(std::move(rec));
    return delta;
}

inline AlarmStore ingest_jsonl(const std::string& path) {
    auto in = detail::open_input(path);
    return ingest_jsonl_stream(in, path);
}

inline AlarmStore ingest_csv_stream(std::istream& in, const std::string& name) {
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        for (auto& c : cells) {
            const auto b = c.find_first_not_of(" \t");
            const auto e = c.find_last_not_of(" \t");
            c = b == std::string::npos ? std::string{} : c.substr(b, e - b + 1);
        }
        return cells;
    };

    AlarmStore delta;
    SourceRecord rec{name, 0, 0, {}};
    std::string line;
    if (!std::getline(in, line)) {
        delta.record_source(std::move(rec));
        return delta; // empty file
    }
    detail::strip_cr(line);
    const auto header = split(line);
    auto column = [&](const char* key) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == key) return i;
        throw Error(ErrorKind::format, name + ": CSV header lacks column '" + key + "'");
    };
    const std::size_t c_rule = column("rule_id");
    const std::size_t c_ts = column("ts");
    const std::size_t c_hex = column("payload_hex");

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (detail::blank(line)) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            detail::note_error(rec, lineno, "expected " + std::to_string(header.size()) + " cells");
            continue;
        }
        std::int64_t ts = 0;
        if (!cells[c_ts].empty()) {
            try {
                std::size_t used = 0;
                ts = std::stoll(cells[c_ts], &used);
                if (used != cells[c_ts].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                detail::note_error(rec, lineno, "ts is not an integer");
                continue;
            }
        }
        std::string err;
        auto alarm = detail::make_alarm(cells[c_rule], ts, cells[c_hex], err);
        if (!alarm) {
            detail::note_error(rec, lineno, err);
            continue;
        }
        delta.add(std::move(*alarm));
        ++rec.accepted;
    }
    delta.record_source(std::move(rec));
    return delta;
}

inline AlarmStore ingest_csv(const std::string& path) {
    auto in = detail::open_input(path);
    return ingest_csv_stream(in, path);
}

/// Picks the reader from the extension: `.csv` is CSV, anything else JSONL.
inline AlarmStore ingest_file(const std::string& path) {
    const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
    return csv ? ingest_csv(path) : ingest_jsonl(path);
}

inline void write_jsonl(std::ostream& out, const AlarmStore& store) {
    for (const auto& [id, set] : store.rules()) {
        for (const auto& a : set.alarms) {
            nlohmann::ordered_json j;
            j["rule_id"] = a.rule_id;
            j["ts"] = a.timestamp;
            j["payload_hex"] = encode_hex(a.payload);
            out << j.dump() << '\n';
        }
    }
}

inline void save_jsonl(const std::string& path, const AlarmStore& store) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path);
    write_jsonl(out, store);
    if (!out) throw Error(ErrorKind::io, "write failed for " + path);
}

} // namespace privleak
