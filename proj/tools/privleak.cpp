// privleak command-line front end.
// Exit codes: 0 ok, 1 usage, 2 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <privleak/privleak.hpp>

#ifndef PRIVLEAK_DATA_DIR
#define PRIVLEAK_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace privleak;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_ids(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::stringstream ss(item);
        std::string id;
        while (std::getline(ss, id, ','))
            if (!id.empty()) out.push_back(id);
    }
    return out;
}

AlarmStore load_store(const std::string& path) {
    if (!fs::exists(path)) throw Error(ErrorKind::io, "store " + path + " does not exist");
    return ingest_jsonl(path);
}

ToolConfig load_tool_config(const std::string& path) { return path.empty() ? ToolConfig{} : load_config(path); }

std::string slug(const EntropyConfig& c) {
    std::string s = std::string(to_string(c.algorithm)) + "_" + std::string(to_string(c.symbol));
    if (c.normalized) s += "_norm";
    if (c.length_corrected) s += "_corr";
    return s;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + p.string());
    out << text;
}

EntropyConfig cfg_of(Algorithm a, Symbol s, bool corrected) {
    EntropyConfig c;
    c.algorithm = a;
    c.symbol = s;
    c.length_corrected = corrected;
    return c;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    std::vector<std::string> files;
    std::string store;
};

int cmd_ingest(const IngestArgs& a) {
    if (a.files.empty()) throw UsageError("ingest needs at least one input file");
    AlarmStore store;
    for (const auto& f : a.files) {
        auto delta = ingest_file(f);
        for (const auto& rec : delta.manifest()) {
            std::cout << rec.path << ": accepted " << rec.accepted << ", rejected " << rec.rejected << "\n";
            for (const auto& e : rec.errors) std::cout << "  " << e << "\n";
        }
        store.merge(std::move(delta));
    }
    save_jsonl(a.store, store);
    std::cout << "store " << a.store << ": " << store.rules().size() << " rules, " << store.total_alarms()
              << " alarms\n";
    return 0;
}

struct AnalyzeArgs {
    std::string store, entropy = "shannon", symbol = "octet", impact, config, format = "table";
    bool no_correction = false, normalized = false;
    unsigned jobs = 0;
};

int cmd_analyze(const AnalyzeArgs& a) {
    EntropyConfig cfg;
    cfg.algorithm = parse_algorithm(a.entropy);
    cfg.symbol = parse_symbol(a.symbol);
    cfg.length_corrected = !a.no_correction;
    cfg.normalized = a.normalized;
    auto tool = load_tool_config(a.config);
    if (!a.impact.empty()) {
        const auto extra = load_config(a.impact);
        tool.impacts.fallback = extra.impacts.fallback;
        for (const auto& [k, v] : extra.impacts.by_rule) tool.impacts.by_rule[k] = v;
        for (const auto& [k, v] : extra.descriptions) tool.descriptions[k] = v;
    }
    const auto store = load_store(a.store);
    if (store.empty()) throw Error(ErrorKind::undefined_input, "store " + a.store + " holds no alarms");
    const unsigned jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
    auto rep = analyze(store, cfg, tool.impacts, jobs);
    rep.descriptions = tool.descriptions;
    if (a.format == "json")
        std::cout << to_json(rep).dump(2) << "\n";
    else
        std::cout << to_table(rep);
    return 0;
}

struct ClusterArgs {
    std::string store, rule, entropy = "shannon", symbol = "octet", config, ui, format = "table";
    bool no_correction = false, normalized = false;
    int k = 2;
    int serve = -1;
    std::uint64_t seed = 0;
};

void print_cluster_table(const lmm::FitResult& r, const std::string& rule) {
    std::printf("rule %s: %zu live components, MML %.6f, %zu iterations%s\n", rule.c_str(), r.model.live(),
                r.model.mml, r.model.iterations, r.model.converged ? "" : " (not converged)");
    std::printf("%3s %10s %10s %8s %10s %10s %10s\n", "k", "median", "lambda", "beta", "sigma_m", "sigma1", "sigma1_L");
    for (std::size_t k = 0; k < r.leakage.components.size(); ++k) {
        const auto& c = r.leakage.components[k];
        const auto& m = r.model.components[k];
        if (m.deleted) {
            std::printf("%3zu %10s\n", k + 1, "deleted");
            continue;
        }
        std::printf("%3zu %10.4f %10.6f %8.4f %10.4f %10.4f %10.4f\n", k + 1, m.median, m.lambda, m.beta,
                    c.sigma_model, c.sigma_normal, c.sigma_laplace);
    }
    std::printf("rule    sigma_m=%.4f sigma1=%.4f sigma1_L=%.4f\n", r.leakage.rule_sigma_model,
                r.leakage.rule_sigma_normal, r.leakage.rule_sigma_laplace);
    for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
}

int cmd_cluster(const ClusterArgs& a) {
    if (a.k < 1) throw UsageError("--k must be >= 1");
    EntropyConfig cfg;
    cfg.algorithm = parse_algorithm(a.entropy);
    cfg.symbol = parse_symbol(a.symbol);
    cfg.length_corrected = !a.no_correction;
    cfg.normalized = a.normalized;
    auto tool = load_tool_config(a.config);
    const auto store = load_store(a.store);
    lmm::FitOptions opts;
    opts.seed = a.seed;

    if (a.serve >= 0) {
        Server server(store, tool, opts, cfg);
        if (!a.ui.empty() && !server.mount_ui(a.ui)) throw Error(ErrorKind::io, "cannot mount " + a.ui);
        const int port = a.serve == 0 ? tool.port : a.serve;
        std::cout << "listening on http://127.0.0.1:" << port << "/rules" << std::endl;
        if (!server.listen("127.0.0.1", port)) throw Error(ErrorKind::io, "cannot listen on port " + std::to_string(port));
        return 0;
    }

    if (a.rule.empty()) throw UsageError("--rule is required unless --serve is given");
    const auto* rule = store.find(a.rule);
    if (!rule) throw Error(ErrorKind::not_found, "unknown rule " + a.rule);
    const auto series = build_series(*rule, cfg);
    if (series.size() < 2) throw Error(ErrorKind::insufficient_sample, "rule " + a.rule + " has fewer than 2 usable alarms");
    const auto r = lmm::fit(series.values, static_cast<std::size_t>(a.k), {}, opts);
    if (a.format == "json") {
        nlohmann::ordered_json j;
        j["rule_id"] = a.rule;
        j["config"] = to_json(cfg);
        j["model"] = lmm::to_json(r.model);
        j["leakage"] = lmm::to_json(r.leakage);
        j["warnings"] = r.warnings;
        std::cout << j.dump(2) << "\n";
    } else {
        print_cluster_table(r, a.rule);
    }
    return 0;
}

struct SimulateArgs {
    std::string scenario, profile = "desk", out, corpus;
    std::uint64_t seed = 1;
    unsigned jobs = 0;
};

int cmd_simulate(const SimulateArgs& a) {
    static const std::vector<std::string> scenarios{"bias", "separation", "threshold", "base64"};
    if (std::find(scenarios.begin(), scenarios.end(), a.scenario) == scenarios.end())
        throw UsageError("unknown scenario '" + a.scenario + "'");
    sim::SimConfig sc;
    try {
        sc.ensemble = sim::ensemble_size(sim::parse_profile(a.profile));
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    sc.seed = a.seed;
    sc.jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
    fs::create_directories(a.out);
    const fs::path out(a.out);

    auto corpus = [&] {
        return sim::Corpus::load(a.corpus.empty() ? std::string(PRIVLEAK_DATA_DIR) + "/corpus/moby_dick.txt" : a.corpus);
    };

    if (a.scenario == "bias") {
        sc.lengths = sim::power_of_two_lengths(6, 16);
        const std::vector<EntropyConfig> metrics{cfg_of(Algorithm::shannon, Symbol::bit, false),
                                                 cfg_of(Algorithm::min, Symbol::bit, false),
                                                 cfg_of(Algorithm::shannon, Symbol::octet, false),
                                                 cfg_of(Algorithm::min, Symbol::octet, false)};
        const auto curves = sim::bias_curves(sc, metrics);
        std::string fits = "metric,gamma,psi,from_bits,points\n";
        for (const auto& c : curves) {
            write_file(out / ("bias_" + slug(c.config) + ".csv"), sim::curve_csv(c.points));
            char buf[256];
            if (c.fit)
                std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%zu,%zu\n", slug(c.config).c_str(), c.fit->gamma,
                              c.fit->psi, c.fit->from_bits, c.fit->points);
            else
                std::snprintf(buf, sizeof buf, "%s,,,,\n", slug(c.config).c_str());
            fits += buf;
        }
        write_file(out / "bias_fit.csv", fits);
        std::cout << fits;
        return 0;
    }

    const auto text = corpus();
    sc.lengths = sim::separation_lengths();

    if (a.scenario == "separation" || a.scenario == "base64") {
        std::vector<EntropyConfig> metrics{cfg_of(Algorithm::shannon, Symbol::octet, true)};
        if (a.scenario == "separation") {
            metrics.push_back(cfg_of(Algorithm::min, Symbol::octet, true));
            metrics.push_back(cfg_of(Algorithm::shannon, Symbol::bit, true));
            metrics.push_back(cfg_of(Algorithm::min, Symbol::bit, true));
        }
        const auto other = a.scenario == "base64" ? sim::Source::base64_random : sim::Source::random_uniform;
        const auto curves = sim::separation_curves(sc, metrics, text, other);
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& c : curves) {
            const auto name = a.scenario + "_" + slug(c.config);
            write_file(out / (name + "_plaintext.csv"), sim::curve_csv(sim::plaintext_points(c)));
            write_file(out / (name + "_" + std::string(to_string(other)) + ".csv"), sim::curve_csv(sim::other_points(c)));
            j.push_back(to_json(c));
            const auto onset = c.onset();
            std::cout << describe(c.config) << " vs " << to_string(other) << ": onset "
                      << (onset ? std::to_string(*onset) + " octets" : std::string("none")) << "\n";
        }
        write_file(out / (a.scenario + ".json"), j.dump(2) + "\n");
        return 0;
    }

    // threshold
    const std::vector<EntropyConfig> metrics{cfg_of(Algorithm::shannon, Symbol::octet, true),
                                             cfg_of(Algorithm::shannon, Symbol::bit, true)};
    const std::vector<double> thresholds{0.14, 0.028};
    std::erase_if(sc.lengths, [](std::size_t n) { return n < 100; });
    const auto curves = sim::separation_curves(sc, metrics, text);
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    bool all = true;
    for (std::size_t m = 0; m < curves.size(); ++m) {
        const auto t = sim::threshold_table(curves[m], thresholds[m]);
        all = all && t.pass();
        j.push_back(to_json(t));
        std::cout << describe(t.config) << " threshold " << t.threshold << ": " << (t.pass() ? "pass" : "fail") << "\n";
    }
    write_file(out / "threshold.json", nlohmann::ordered_json{{"pass", all}, {"tables", j}}.dump(2) + "\n");
    return 0;
}

struct WhatIfArgs {
    bool table1 = false;
    std::string store, entropy = "shannon", symbol = "octet";
    std::vector<std::string> remove, anonymize;
};

int cmd_whatif(const WhatIfArgs& a) {
    if (a.table1 == !a.store.empty()) throw UsageError("give exactly one of --table1 or --store");
    std::vector<AggregateEntry> entries;
    if (a.table1) {
        entries = table1_entries();
    } else {
        EntropyConfig cfg;
        cfg.algorithm = parse_algorithm(a.entropy);
        cfg.symbol = parse_symbol(a.symbol);
        entries = analyze(load_store(a.store), cfg).aggregate_entries();
    }
    std::vector<WhatIfAction> acts;
    for (const auto& id : split_ids(a.remove)) acts.push_back({WhatIfAction::Kind::remove, id});
    for (const auto& id : split_ids(a.anonymize)) acts.push_back({WhatIfAction::Kind::anonymize, id});
    const auto r = whatif(entries, acts);
    std::printf("sigma_all: %.4f -> %.4f (delta %.4f, %zu rules)\n", r.before, r.after, r.before - r.after,
                r.entries.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"privleak: privacy leakage of IDS alarm payloads"};
    app.require_subcommand(1);

    IngestArgs ia;
    auto* ingest = app.add_subcommand("ingest", "parse alarm files into a JSONL store");
    ingest->add_option("files", ia.files, "JSONL or CSV alarm files");
    ingest->add_option("--store", ia.store, "output store path")->required();

    AnalyzeArgs aa;
    auto* an = app.add_subcommand("analyze", "per-rule leakage table");
    an->add_option("--store", aa.store)->required();
    an->add_option("--entropy", aa.entropy)->check(CLI::IsMember({"shannon", "min"}));
    an->add_option("--symbol", aa.symbol)->check(CLI::IsMember({"bit", "octet"}));
    an->add_flag("--no-length-correction", aa.no_correction);
    an->add_flag("--normalized", aa.normalized, "divide by the symbol width before correction");
    an->add_option("--impact", aa.impact, "key = value file with impact.<sid> entries");
    an->add_option("--config", aa.config);
    an->add_option("--format", aa.format)->check(CLI::IsMember({"json", "table"}));
    an->add_option("--jobs", aa.jobs);

    ClusterArgs ca;
    auto* cl = app.add_subcommand("cluster", "Laplace mixture fit for one rule, or the session server");
    cl->add_option("--store", ca.store)->required();
    cl->add_option("--rule", ca.rule);
    cl->add_option("--k", ca.k, "initial number of clusters");
    cl->add_option("--serve", ca.serve, "port for the session server (0 = config port)");
    cl->add_option("--ui", ca.ui, "static UI directory served at /ui");
    cl->add_option("--seed", ca.seed);
    cl->add_option("--entropy", ca.entropy)->check(CLI::IsMember({"shannon", "min"}));
    cl->add_option("--symbol", ca.symbol)->check(CLI::IsMember({"bit", "octet"}));
    cl->add_flag("--no-length-correction", ca.no_correction);
    cl->add_flag("--normalized", ca.normalized);
    cl->add_option("--config", ca.config);
    cl->add_option("--format", ca.format)->check(CLI::IsMember({"json", "table"}));

    SimulateArgs sa;
    auto* si = app.add_subcommand("simulate", "Monte-Carlo experiments");
    si->add_option("--scenario", sa.scenario)->required();
    si->add_option("--profile", sa.profile);
    si->add_option("--out", sa.out)->required();
    si->add_option("--seed", sa.seed);
    si->add_option("--corpus", sa.corpus, "plaintext corpus file");
    si->add_option("--jobs", sa.jobs);

    WhatIfArgs wa;
    auto* wi = app.add_subcommand("whatif", "sigma_all after removing or anonymising rules");
    wi->add_flag("--table1", wa.table1, "use the published rule table");
    wi->add_option("--store", wa.store);
    wi->add_option("--remove", wa.remove, "rule ids, comma separated");
    wi->add_option("--anonymize", wa.anonymize, "rule ids, comma separated");
    wi->add_option("--entropy", wa.entropy)->check(CLI::IsMember({"shannon", "min"}));
    wi->add_option("--symbol", wa.symbol)->check(CLI::IsMember({"bit", "octet"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*ingest) return cmd_ingest(ia);
        if (*an) return cmd_analyze(aa);
        if (*cl) return cmd_cluster(ca);
        if (*si) return cmd_simulate(sa);
        if (*wi) return cmd_whatif(wa);
    } catch (const UsageError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
