#pragma once

// Interactive clustering sessions. A session owns one EM fitter for one rule
// and moves through awaiting_edits -> iterating -> awaiting_edits ... ->
// finalized. Commands are only accepted while awaiting edits; readers always
// get the last published snapshot.
//
// Command JSON (cluster numbers are 1-based):
//   {"op":"setcl","k":2,"median":6.0}
//   {"op":"delcl","clusters":[2,3]}
//   {"op":"pickcl","x":0.93}
//   {"op":"cont"}
// An edit resumes iteration at once unless it carries "defer": true, in
// which case it waits for the next "cont". "cont" with no edit since the
// last convergence finalizes the session.

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "alarm.hpp"
#include "entropy.hpp"
#include "error.hpp"
#include "leakage.hpp"
#include "lmm.hpp"
#include "report.hpp"

namespace privleak {

enum class SessionState { awaiting_edits, iterating, finalized };

inline const char* to_string(SessionState s) {
    switch (s) {
    case SessionState::awaiting_edits: return "awaiting_edits";
    case SessionState::iterating: return "iterating";
    case SessionState::finalized: return "finalized";
    }
    return "?";
}

struct Histogram {
    std::vector<double> edges; // bins + 1 edges
    std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max]; the last bin is closed.
inline Histogram make_histogram(std::span<const double> values, std::size_t bins) {
    if (bins == 0) throw Error(ErrorKind::domain, "histogram needs at least one bin");
    Histogram h;
    if (values.empty()) return h;
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    double a = *lo, b = *hi;
    if (a == b) {
        a -= 0.5;
        b += 0.5;
    }
    const double width = (b - a) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(a + width * static_cast<double>(i));
    h.edges.back() = b;
    h.counts.assign(bins, 0);
    for (double v : values) {
        auto idx = static_cast<std::size_t>((v - a) / width);
        ++h.counts[std::min(idx, bins - 1)];
    }
    return h;
}

inline nlohmann::ordered_json to_json(const Histogram& h) {
    return {{"edges", h.edges}, {"counts", h.counts}};
}

/// Parses one command body into an lmm edit; nullopt means "cont".
inline std::optional<lmm::Edit> parse_command(const nlohmann::json& cmd) {
    if (!cmd.is_object() || !cmd.contains("op") || !cmd["op"].is_string())
        throw Error(ErrorKind::format, "command needs a string 'op'");
    const auto op = cmd["op"].get<std::string>();
    auto cluster_index = [](const nlohmann::json& v) -> std::size_t {
        if (!v.is_number_integer() || v.get<long long>() < 1)
            throw Error(ErrorKind::index, "cluster numbers start at 1");
        return static_cast<std::size_t>(v.get<long long>() - 1);
    };
    auto number = [&](const char* key) {
        if (!cmd.contains(key) || !cmd[key].is_number()) throw Error(ErrorKind::domain, op + " needs numeric '" + key + "'");
        return cmd[key].get<double>();
    };
    if (op == "cont") return std::nullopt;
    if (op == "setcl") {
        if (!cmd.contains("k")) throw Error(ErrorKind::index, "setcl needs 'k'");
        return lmm::SetCluster{cluster_index(cmd["k"]), number("median")};
    }
    if (op == "delcl") {
        if (!cmd.contains("clusters") || !cmd["clusters"].is_array())
            throw Error(ErrorKind::domain, "delcl needs a 'clusters' list");
        lmm::DeleteClusters del;
        for (const auto& v : cmd["clusters"]) del.indices.push_back(cluster_index(v));
        return del;
    }
    if (op == "pickcl") return lmm::PickCluster{number("x")};
    throw Error(ErrorKind::domain, "unknown op '" + op + "'");
}

class Session {
public:
    Session(std::string id, const RuleAlarmSet& rule, const EntropyConfig& cfg, std::size_t k_init,
            std::size_t bins, lmm::FitOptions opts)
        : id_(std::move(id)), rule_id_(rule.rule_id), config_(cfg), k_init_(k_init) {
        if (k_init == 0) throw Error(ErrorKind::domain, "k_init must be >= 1");
        series_ = build_series(rule, cfg);
        if (series_.size() < 2)
            throw Error(ErrorKind::insufficient_sample,
                        "rule " + rule.rule_id + " has fewer than 2 alarms with a defined entropy");
        histogram_ = make_histogram(series_.values, bins);
        fitter_.emplace(series_.values, k_init, opts);
        fitter_->run();
        std::lock_guard lock(mutex_);
        state_ = SessionState::awaiting_edits;
        publish_locked();
    }

    const std::string& id() const { return id_; }
    const std::string& rule_id() const { return rule_id_; }

    nlohmann::ordered_json snapshot() const {
        std::lock_guard lock(mutex_);
        return snapshot_;
    }

    SessionState state() const {
        std::lock_guard lock(mutex_);
        return state_;
    }

    /// Applies one command and, unless deferred, iterates to the next
    /// convergence on the calling thread. Concurrent commands get a
    /// conflict error while this one is iterating.
    nlohmann::ordered_json command(const nlohmann::json& cmd) {
        const auto edit = parse_command(cmd);
        const bool defer = cmd.contains("defer") && cmd["defer"].is_boolean() && cmd["defer"].get<bool>();
        {
            std::lock_guard lock(mutex_);
            if (state_ != SessionState::awaiting_edits)
                throw Error(ErrorKind::conflict, std::string("session is ") + to_string(state_));
            if (!edit && !fitter_->edited_since_convergence()) {
                state_ = SessionState::finalized;
                last_command_ = {{"op", "cont"}, {"finalized", true}};
                publish_locked();
                return snapshot_;
            }
            if (edit) {
                const auto outcome = fitter_->apply(*edit); // throws before any state change
                last_command_ = cmd;
                last_command_["cluster"] = outcome.affected + 1;
                if (defer) {
                    publish_locked();
                    return snapshot_;
                }
            } else {
                last_command_ = {{"op", "cont"}, {"finalized", false}};
            }
            state_ = SessionState::iterating;
            publish_locked();
        }
        fitter_->run(); // sole owner while iterating
        std::lock_guard lock(mutex_);
        state_ = SessionState::awaiting_edits;
        publish_locked();
        return snapshot_;
    }

    lmm::MixtureModel model() const {
        std::lock_guard lock(mutex_);
        return published_model_;
    }

private:
    void publish_locked() {
        const auto& model = fitter_->model();
        published_model_ = model;
        nlohmann::ordered_json j;
        j["session_id"] = id_;
        j["rule_id"] = rule_id_;
        j["state"] = to_string(state_);
        j["config"] = to_json(config_);
        j["k_init"] = k_init_;
        j["n"] = series_.size();
        j["histogram"] = to_json(histogram_);
        j["model"] = lmm::to_json(model);
        j["components"] = j["model"]["components"];
        j["mml"] = j["model"]["mml"];
        j["leakage"] = lmm::to_json(fitter_->leakage());
        if (state_ == SessionState::finalized) j["report"] = j["leakage"];
        j["edits_pending"] = fitter_->edited_since_convergence();
        j["last_command"] = last_command_;
        j["warnings"] = fitter_->warnings();
        snapshot_ = std::move(j);
    }

    std::string id_;
    std::string rule_id_;
    EntropyConfig config_;
    std::size_t k_init_;
    EntropySeries series_;
    Histogram histogram_;
    std::optional<lmm::Fitter> fitter_;

    mutable std::mutex mutex_;
    SessionState state_ = SessionState::iterating;
    nlohmann::ordered_json snapshot_;
    nlohmann::json last_command_ = nullptr;
    lmm::MixtureModel published_model_;
};

struct CreateResult {
    std::shared_ptr<Session> session;
    bool created = false;
};

/// Owns all sessions for one alarm store; at most one session per rule.
class SessionManager {
public:
    SessionManager(const AlarmStore& store, std::size_t histogram_bins = 64, lmm::FitOptions opts = {})
        : store_(store), bins_(histogram_bins), opts_(opts) {}

    CreateResult create(const std::string& rule_id, const EntropyConfig& cfg, std::size_t k_init) {
        const auto* rule = store_.find(rule_id);
        if (!rule) throw Error(ErrorKind::not_found, "unknown rule " + rule_id);
        if (k_init == 0) throw Error(ErrorKind::domain, "k_init must be >= 1");
        {
            std::lock_guard lock(mutex_);
            if (auto it = by_rule_.find(rule_id); it != by_rule_.end()) return {sessions_.at(it->second), false};
        }
        // fitting happens outside the manager lock; a racing create for the
        // same rule keeps whichever session registers first
        const std::string id = "s" + std::to_string(next_id());
        auto session = std::make_shared<Session>(id, *rule, cfg, k_init, bins_, opts_);
        std::lock_guard lock(mutex_);
        if (auto it = by_rule_.find(rule_id); it != by_rule_.end()) return {sessions_.at(it->second), false};
        sessions_[id] = session;
        by_rule_[rule_id] = id;
        return {session, true};
    }

    std::shared_ptr<Session> get(const std::string& id) const {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw Error(ErrorKind::not_found, "unknown session " + id);
        return it->second;
    }

    void remove(const std::string& id) {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw Error(ErrorKind::not_found, "unknown session " + id);
        by_rule_.erase(it->second->rule_id());
        sessions_.erase(it);
    }

    const AlarmStore& store() const { return store_; }

private:
    std::size_t next_id() {
        std::lock_guard lock(mutex_);
        return ++counter_;
    }

    const AlarmStore& store_;
    std::size_t bins_;
    lmm::FitOptions opts_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::map<std::string, std::string> by_rule_;
    std::size_t counter_ = 0;
};

} // namespace privleak
