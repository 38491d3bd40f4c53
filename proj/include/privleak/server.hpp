#pragma once

// JSON over HTTP front for SessionManager plus a few read-only report
// endpoints. No authentication; meant to listen on localhost.
//
//   GET    /rules
//   POST   /sessions                 {rule_id, config?, k_init?}
//   GET    /sessions/{id}/state
//   POST   /sessions/{id}/command    {op, ...}
//   DELETE /sessions/{id}
//   GET    /reports/aggregate
//   POST   /reports/whatif           {source?: "store"|"table1", remove?: [...], anonymize?: [...]}

#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "alarm.hpp"
#include "config.hpp"
#include "error.hpp"
#include "leakage.hpp"
#include "report.hpp"
#include "session.hpp"
#include "table1.hpp"

namespace privleak {

inline int http_status(ErrorKind k) {
    switch (k) {
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::format:
    case ErrorKind::parse: return 400;
    case ErrorKind::io: return 500;
    default: return 422;
    }
}

inline std::vector<AggregateEntry> table1_entries() {
    std::vector<AggregateEntry> out;
    for (const auto& r : table1_rows) out.push_back({std::string(r.rule_id), static_cast<double>(r.alarms), r.sigma_laplace});
    return out;
}

inline std::vector<WhatIfAction> whatif_actions(const nlohmann::json& body) {
    std::vector<WhatIfAction> acts;
    auto collect = [&](const char* key, WhatIfAction::Kind kind) {
        if (!body.contains(key)) return;
        if (!body[key].is_array()) throw Error(ErrorKind::format, std::string(key) + " must be a list");
        for (const auto& v : body[key]) acts.push_back({kind, v.get<std::string>()});
    };
    collect("remove", WhatIfAction::Kind::remove);
    collect("anonymize", WhatIfAction::Kind::anonymize);
    return acts;
}

class Server {
public:
    Server(const AlarmStore& store, ToolConfig cfg = {}, lmm::FitOptions opts = {},
           EntropyConfig default_entropy = {})
        : store_(store), cfg_(std::move(cfg)), entropy_(default_entropy),
          sessions_(store_, cfg_.histogram_bins, opts) {
        routes();
    }

    ~Server() { stop(); }

    /// Serves files under `dir` at /ui/.
    bool mount_ui(const std::string& dir) { return http_.set_mount_point("/ui", dir); }

    /// Blocks until stop(). port 0 picks a free port.
    bool listen(const std::string& host, int port) {
        if (port == 0) {
            port_ = http_.bind_to_any_port(host);
            return port_ > 0 && http_.listen_after_bind();
        }
        port_ = port;
        return http_.listen(host, port);
    }

    /// Binds and serves on a background thread; returns the port.
    int start(const std::string& host = "127.0.0.1", int port = 0) {
        port_ = port == 0 ? http_.bind_to_any_port(host) : (http_.bind_to_port(host, port) ? port : -1);
        if (port_ <= 0) throw Error(ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port));
        thread_ = std::thread([this] { http_.listen_after_bind(); });
        http_.wait_until_ready();
        return port_;
    }

    void stop() {
        http_.stop();
        if (thread_.joinable()) thread_.join();
    }

    int port() const { return port_; }
    SessionManager& sessions() { return sessions_; }

private:
    template <class F>
    static void guarded(httplib::Response& res, F&& f) {
        try {
            f();
        } catch (const Error& e) {
            fail(res, http_status(e.kind()), e.what());
        } catch (const nlohmann::json::exception& e) {
            fail(res, 400, e.what());
        }
    }

    static void fail(httplib::Response& res, int status, const std::string& msg) {
        res.status = status;
        res.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json");
    }

    static void reply(httplib::Response& res, const nlohmann::ordered_json& j, int status = 200) {
        res.status = status;
        res.set_content(j.dump(), "application/json");
    }

    static nlohmann::json body_of(const httplib::Request& req) {
        if (req.body.empty()) return nlohmann::json::object();
        auto j = nlohmann::json::parse(req.body, nullptr, false);
        if (j.is_discarded()) throw Error(ErrorKind::parse, "request body is not JSON");
        return j;
    }

    void routes() {
        http_.Get("/rules", [this](const httplib::Request&, httplib::Response& res) {
            nlohmann::ordered_json out = nlohmann::ordered_json::array();
            for (const auto& [id, set] : store_.rules()) {
                std::size_t nonempty = 0;
                for (const auto& a : set.alarms) nonempty += !a.payload.empty();
                out.push_back({{"rule_id", id}, {"alarms", set.alarms.size()}, {"nonempty", nonempty}});
            }
            reply(res, out);
        });

        http_.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto body = body_of(req);
                if (!body.contains("rule_id") || !body["rule_id"].is_string())
                    throw Error(ErrorKind::format, "rule_id is required");
                const auto cfg = body.contains("config") ? config_from_json(body["config"]) : entropy_;
                long long k = 2;
                if (body.contains("k_init")) {
                    if (!body["k_init"].is_number_integer()) throw Error(ErrorKind::domain, "k_init must be an integer");
                    k = body["k_init"].get<long long>();
                }
                if (k < 1) throw Error(ErrorKind::domain, "k_init must be >= 1");
                auto created = sessions_.create(body["rule_id"].get<std::string>(), cfg, static_cast<std::size_t>(k));
                reply(res, created.session->snapshot(), created.created ? 201 : 200);
            });
        });

        http_.Get(R"(/sessions/([^/]+)/state)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { reply(res, sessions_.get(req.matches[1])->snapshot()); });
        });

        http_.Post(R"(/sessions/([^/]+)/command)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                auto session = sessions_.get(req.matches[1]);
                reply(res, session->command(body_of(req)));
            });
        });

        http_.Delete(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                sessions_.remove(req.matches[1]);
                res.status = 204;
            });
        });

        http_.Get("/reports/aggregate", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                auto rep = analyze(store_, entropy_, cfg_.impacts);
                rep.descriptions = cfg_.descriptions;
                reply(res, to_json(rep));
            });
        });

        http_.Post("/reports/whatif", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto body = body_of(req);
                const std::string source = body.value("source", "store");
                std::vector<AggregateEntry> entries;
                if (source == "table1")
                    entries = table1_entries();
                else if (source == "store")
                    entries = analyze(store_, entropy_, cfg_.impacts).aggregate_entries();
                else
                    throw Error(ErrorKind::domain, "source must be 'store' or 'table1'");
                const auto acts = whatif_actions(body);
                const auto r = whatif(entries, acts);
                reply(res, {{"source", source}, {"before", r.before}, {"after", r.after}, {"rules", r.entries.size()}});
            });
        });
    }

    const AlarmStore& store_;
    ToolConfig cfg_;
    EntropyConfig entropy_;
    SessionManager sessions_;
    httplib::Server http_;
    std::thread thread_;
    int port_ = -1;
};

} // namespace privleak
