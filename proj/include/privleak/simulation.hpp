#pragma once

// Monte-Carlo calibration of the entropy standard deviation metric.
//
// One experiment draws `samples_per_experiment` payloads of a fixed length,
// computes their entropies and takes the sample standard deviation. An
// ensemble of experiments gives the mean and the 95% band of that sigma.
//
// Every experiment seeds its own mt19937_64 from (seed, source, length,
// experiment index) through std::seed_seq, so results do not depend on how
// experiments are spread over threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "alarm.hpp"
#include "entropy.hpp"
#include "error.hpp"
#include "leakage.hpp"

namespace privleak::sim {

enum class Source { random_uniform, plaintext_corpus, base64_random };

inline std::string_view to_string(Source s) {
    switch (s) {
    case Source::random_uniform: return "random";
    case Source::plaintext_corpus: return "plaintext";
    case Source::base64_random: return "base64";
    }
    return "?";
}

struct Corpus {
    Bytes text;

    static Corpus load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorKind::io, "cannot read corpus " + path);
        Corpus c;
        c.text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        if (c.text.empty()) throw Error(ErrorKind::format, "corpus " + path + " is empty");
        return c;
    }
};

using Rng = std::mt19937_64;

inline Rng experiment_rng(std::uint64_t seed, Source source, std::size_t length, std::size_t experiment) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(source), static_cast<std::uint32_t>(length),
                      static_cast<std::uint32_t>(experiment), static_cast<std::uint32_t>(experiment >> 32)};
    return Rng(seq);
}

inline void fill_random(Rng& rng, std::span<std::uint8_t> out) {
    std::size_t i = 0;
    for (; i + 8 <= out.size(); i += 8) {
        const std::uint64_t word = rng();
        std::memcpy(out.data() + i, &word, 8);
    }
    if (i < out.size()) {
        const std::uint64_t word = rng();
        std::memcpy(out.data() + i, &word, out.size() - i);
    }
}

inline std::string base64_encode(std::span<const std::uint8_t> in) {
    static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((in.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= in.size(); i += 3) {
        const std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8) | in[i + 2];
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += table[(v >> 6) & 63];
        out += table[v & 63];
    }
    if (const std::size_t rest = in.size() - i; rest) {
        std::uint32_t v = in[i] << 16;
        if (rest == 2) v |= in[i + 1] << 8;
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += rest == 2 ? table[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

/// Writes one payload of `out.size()` octets.
///   random_uniform:   i.i.d. uniform octets
///   plaintext_corpus: contiguous slice of the corpus at a uniform offset
///   base64_random:    Base64 text of random octets, cut to length
inline void gen_payload(Source source, Rng& rng, std::span<std::uint8_t> out, const Corpus* corpus = nullptr) {
    if (out.empty()) throw Error(ErrorKind::domain, "payload length must be >= 1");
    switch (source) {
    case Source::random_uniform:
        fill_random(rng, out);
        return;
    case Source::plaintext_corpus: {
        if (!corpus) throw Error(ErrorKind::undefined_input, "plaintext source needs a corpus");
        if (corpus->text.size() < out.size())
            throw Error(ErrorKind::domain, "corpus shorter than the requested payload length");
        const std::uint64_t span = corpus->text.size() - out.size() + 1;
        const std::size_t offset = static_cast<std::size_t>(rng() % span);
        std::memcpy(out.data(), corpus->text.data() + offset, out.size());
        return;
    }
    case Source::base64_random: {
        std::vector<std::uint8_t> raw((out.size() * 3 + 3) / 4);
        fill_random(rng, raw);
        const auto text = base64_encode(raw);
        std::memcpy(out.data(), text.data(), out.size());
        return;
    }
    }
}

inline Bytes gen_payload(Source source, std::size_t length, Rng& rng, const Corpus* corpus = nullptr) {
    Bytes b(length);
    gen_payload(source, rng, b, corpus);
    return b;
}

enum class Profile { paper, desk, ci };

inline std::size_t ensemble_size(Profile p) {
    switch (p) {
    case Profile::paper: return 10000;
    case Profile::desk: return 2000;
    case Profile::ci: return 200;
    }
    return 2000;
}

inline Profile parse_profile(std::string_view s) {
    if (s == "paper") return Profile::paper;
    if (s == "desk") return Profile::desk;
    if (s == "ci") return Profile::ci;
    throw Error(ErrorKind::domain, "unknown profile '" + std::string(s) + "'");
}

struct SimConfig {
    std::vector<std::size_t> lengths; // payload lengths, octets
    std::size_t ensemble = 2000;
    std::size_t samples_per_experiment = 50;
    EntropyConfig config;
    Source source = Source::random_uniform;
    std::uint64_t seed = 1;
    unsigned jobs = 1;

    void validate() const {
        if (ensemble < 1) throw Error(ErrorKind::domain, "ensemble must be >= 1");
        if (samples_per_experiment < 2) throw Error(ErrorKind::domain, "samples_per_experiment must be >= 2");
        if (lengths.empty()) throw Error(ErrorKind::domain, "no payload lengths");
        for (auto n : lengths)
            if (!entropy_defined(n, config))
                throw Error(ErrorKind::domain, "entropy undefined at length " + std::to_string(n));
    }
};

/// Powers of two in bits from 2^lo to 2^hi, as octet lengths (lo >= 3).
inline std::vector<std::size_t> power_of_two_lengths(int lo_bits_log2, int hi_bits_log2) {
    std::vector<std::size_t> out;
    for (int k = lo_bits_log2; k <= hi_bits_log2; ++k) out.push_back((std::size_t{1} << k) / 8);
    return out;
}

/// Grid for the plaintext/random separation experiments (octets).
inline std::vector<std::size_t> separation_lengths() {
    return {5,   6,   8,   10,  12,  16,  20,  24,  32,   40,   48,   64,   80,   96,   100, 128,
            160, 192, 256, 320, 384, 512, 640, 750, 1024, 1536, 2048, 3072, 4096, 6144, 8192};
}

/// Linear-interpolation percentile (q in [0,1]) of an unsorted sample.
inline double percentile(std::vector<double> v, double q) {
    if (v.empty()) throw Error(ErrorKind::undefined_input, "percentile of an empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Band {
    double mean = 0;
    double p2_5 = 0;
    double p97_5 = 0;
};

inline Band band_of(const std::vector<double>& sigmas) {
    Band b;
    for (double s : sigmas) b.mean += s;
    b.mean /= static_cast<double>(sigmas.size());
    b.p2_5 = percentile(sigmas, 0.025);
    b.p97_5 = percentile(sigmas, 0.975);
    return b;
}

/// sigma per experiment for each metric in `configs`, all metrics computed
/// on the same payload draws. Result is indexed [metric][experiment].
inline std::vector<std::vector<double>> ensemble_sigmas(Source source, std::size_t length,
                                                        std::span<const EntropyConfig> configs,
                                                        std::size_t ensemble, std::size_t samples,
                                                        std::uint64_t seed, const Corpus* corpus,
                                                        unsigned jobs = 1) {
    std::vector<std::vector<double>> out(configs.size(), std::vector<double>(ensemble));
    auto work = [&](std::size_t begin, std::size_t step) {
        Bytes payload(length);
        std::vector<std::vector<double>> values(configs.size(), std::vector<double>(samples));
        for (std::size_t e = begin; e < ensemble; e += step) {
            auto rng = experiment_rng(seed, source, length, e);
            for (std::size_t s = 0; s < samples; ++s) {
                gen_payload(source, rng, payload, corpus);
                for (std::size_t m = 0; m < configs.size(); ++m) values[m][s] = entropy(payload, configs[m]).value;
            }
            for (std::size_t m = 0; m < configs.size(); ++m) out[m][e] = sigma_normal(values[m]);
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(ensemble)));
    if (jobs == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(work, t, jobs);
    }
    return out;
}

struct CurvePoint {
    std::size_t length_octets = 0;
    Band band;
    std::size_t length_bits() const { return 8 * length_octets; }
};

struct LogLogFit {
    double gamma = 0; // offset: sigma ~ 2^gamma * n^psi, n in bits
    double psi = 0;   // slope
    std::size_t from_bits = 0;
    std::size_t points = 0;
};

/// Least squares of log2(mean sigma) against log2(length in bits), using the
/// points at or beyond `from_octets`.
inline LogLogFit fit_loglog(std::span<const CurvePoint> pts, std::size_t from_octets) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    LogLogFit f;
    for (const auto& p : pts) {
        if (p.length_octets < from_octets || !(p.band.mean > 0)) continue;
        const double x = std::log2(static_cast<double>(p.length_bits()));
        const double y = std::log2(p.band.mean);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++f.points;
        if (f.from_bits == 0) f.from_bits = p.length_bits();
    }
    if (f.points < 2) throw Error(ErrorKind::insufficient_sample, "log-log fit needs two points");
    const double n = static_cast<double>(f.points);
    f.psi = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.gamma = (sy - f.psi * sx) / n;
    return f;
}

/// Octet metrics go through a transient below ~200 octets before settling
/// on a power law; bit metrics are fitted over the whole range.
inline std::size_t default_fit_from(const EntropyConfig& cfg) { return cfg.symbol == Symbol::octet ? 200 : 0; }

struct BiasCurve {
    EntropyConfig config;
    std::vector<CurvePoint> points;
    std::optional<LogLogFit> fit; // absent when every sigma is zero
};

/// Bias curves for several metrics from one set of draws.
inline std::vector<BiasCurve> bias_curves(const SimConfig& sc, std::span<const EntropyConfig> configs,
                                          const Corpus* corpus = nullptr) {
    for (const auto& c : configs) {
        SimConfig probe = sc;
        probe.config = c;
        probe.validate();
    }
    std::vector<BiasCurve> curves(configs.size());
    for (std::size_t m = 0; m < configs.size(); ++m) curves[m].config = configs[m];
    for (auto n : sc.lengths) {
        const auto sig = ensemble_sigmas(sc.source, n, configs, sc.ensemble, sc.samples_per_experiment, sc.seed,
                                         corpus, sc.jobs);
        for (std::size_t m = 0; m < configs.size(); ++m) curves[m].points.push_back({n, band_of(sig[m])});
    }
    for (auto& c : curves) {
        try {
            c.fit = fit_loglog(c.points, default_fit_from(c.config));
        } catch (const Error&) {
            c.fit.reset();
        }
    }
    return curves;
}

inline BiasCurve bias_curve(const SimConfig& sc, const Corpus* corpus = nullptr) {
    const std::array<EntropyConfig, 1> one{sc.config};
    return bias_curves(sc, one, corpus).front();
}

struct SeparationPoint {
    std::size_t length_octets = 0;
    Band plaintext;
    Band other; // random or base64
    std::vector<double> plaintext_sigmas;
    std::vector<double> other_sigmas;

    /// Plaintext band lies entirely above the other band.
    bool distinguishable() const { return plaintext.p2_5 > other.p97_5; }
    bool overlapping() const { return !distinguishable() && !(other.p2_5 > plaintext.p97_5); }
};

struct SeparationCurve {
    EntropyConfig config;
    Source other = Source::random_uniform;
    std::vector<SeparationPoint> points;

    /// Smallest grid length from which every longer grid length is
    /// distinguishable; nullopt if the largest length is not.
    std::optional<std::size_t> onset() const {
        std::optional<std::size_t> start;
        for (auto it = points.rbegin(); it != points.rend(); ++it) {
            if (!it->distinguishable()) break;
            start = it->length_octets;
        }
        return start;
    }
};

/// Plaintext vs `other` for several metrics from one set of draws per source.
inline std::vector<SeparationCurve> separation_curves(const SimConfig& sc, std::span<const EntropyConfig> configs,
                                                      const Corpus& corpus, Source other = Source::random_uniform) {
    for (const auto& c : configs) {
        SimConfig probe = sc;
        probe.config = c;
        probe.validate();
    }
    std::vector<SeparationCurve> curves(configs.size());
    for (std::size_t m = 0; m < configs.size(); ++m) {
        curves[m].config = configs[m];
        curves[m].other = other;
    }
    for (auto n : sc.lengths) {
        auto plain = ensemble_sigmas(Source::plaintext_corpus, n, configs, sc.ensemble, sc.samples_per_experiment,
                                     sc.seed, &corpus, sc.jobs);
        auto rest = ensemble_sigmas(other, n, configs, sc.ensemble, sc.samples_per_experiment, sc.seed, &corpus,
                                    sc.jobs);
        for (std::size_t m = 0; m < configs.size(); ++m) {
            SeparationPoint p;
            p.length_octets = n;
            p.plaintext = band_of(plain[m]);
            p.other = band_of(rest[m]);
            p.plaintext_sigmas = std::move(plain[m]);
            p.other_sigmas = std::move(rest[m]);
            curves[m].points.push_back(std::move(p));
        }
    }
    return curves;
}

inline SeparationCurve separation_curve(const SimConfig& sc, const Corpus& corpus) {
    const std::array<EntropyConfig, 1> one{sc.config};
    return separation_curves(sc, one, corpus, Source::random_uniform).front();
}

inline SeparationCurve base64_separation(const SimConfig& sc, const Corpus& corpus) {
    const std::array<EntropyConfig, 1> one{sc.config};
    return separation_curves(sc, one, corpus, Source::base64_random).front();
}

struct ThresholdRow {
    std::size_t length_octets = 0;
    double plaintext_above = 0; // fraction of plaintext experiments with sigma > threshold
    double random_below = 0;    // fraction of random experiments with sigma < threshold
    bool pass = false;
};

struct ThresholdTable {
    EntropyConfig config;
    double threshold = 0;
    double required = 0.95;
    std::vector<ThresholdRow> rows;

    bool pass() const {
        return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; });
    }
};

inline ThresholdTable threshold_table(const SeparationCurve& curve, double threshold, std::size_t floor_octets = 100,
                                      double required = 0.95) {
    ThresholdTable t;
    t.config = curve.config;
    t.threshold = threshold;
    t.required = required;
    for (const auto& p : curve.points) {
        if (p.length_octets < floor_octets) continue;
        ThresholdRow r;
        r.length_octets = p.length_octets;
        const auto above = std::count_if(p.plaintext_sigmas.begin(), p.plaintext_sigmas.end(),
                                         [&](double s) { return s > threshold; });
        const auto below = std::count_if(p.other_sigmas.begin(), p.other_sigmas.end(),
                                         [&](double s) { return s < threshold; });
        r.plaintext_above = static_cast<double>(above) / static_cast<double>(p.plaintext_sigmas.size());
        r.random_below = static_cast<double>(below) / static_cast<double>(p.other_sigmas.size());
        r.pass = r.plaintext_above >= required && r.random_below >= required;
        t.rows.push_back(r);
    }
    return t;
}

/// Runs plaintext vs random for `sc.config` and tabulates the fixed
/// threshold at every length >= floor_octets.
inline ThresholdTable threshold_check(const SimConfig& sc, const Corpus& corpus, double threshold,
                                      std::size_t floor_octets = 100) {
    SimConfig kept = sc;
    std::erase_if(kept.lengths, [&](std::size_t n) { return n < floor_octets; });
    return threshold_table(separation_curve(kept, corpus), threshold, floor_octets);
}

// ---------------------------------------------------------------------------
// Emission

inline std::string curve_csv(std::span<const CurvePoint> pts) {
    std::string out = "length_bits,mean_sigma,p2_5,p97_5\n";
    char buf[128];
    for (const auto& p : pts) {
        std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g\n", p.length_bits(), p.band.mean, p.band.p2_5,
                      p.band.p97_5);
        out += buf;
    }
    return out;
}

inline std::vector<CurvePoint> plaintext_points(const SeparationCurve& c) {
    std::vector<CurvePoint> out;
    for (const auto& p : c.points) out.push_back({p.length_octets, p.plaintext});
    return out;
}

inline std::vector<CurvePoint> other_points(const SeparationCurve& c) {
    std::vector<CurvePoint> out;
    for (const auto& p : c.points) out.push_back({p.length_octets, p.other});
    return out;
}

inline nlohmann::ordered_json to_json(const LogLogFit& f) {
    return {{"gamma", f.gamma}, {"psi", f.psi}, {"from_bits", f.from_bits}, {"points", f.points}};
}

inline nlohmann::ordered_json to_json(const SeparationCurve& c) {
    nlohmann::ordered_json j;
    j["metric"] = describe(c.config);
    j["against"] = to_string(c.other);
    const auto onset = c.onset();
    j["onset_octets"] = onset ? nlohmann::ordered_json(*onset) : nlohmann::ordered_json(nullptr);
    j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : c.points)
        j["points"].push_back({{"length_bits", 8 * p.length_octets},
                               {"plaintext", {p.plaintext.p2_5, p.plaintext.mean, p.plaintext.p97_5}},
                               {"other", {p.other.p2_5, p.other.mean, p.other.p97_5}},
                               {"distinguishable", p.distinguishable()}});
    return j;
}

inline nlohmann::ordered_json to_json(const ThresholdTable& t) {
    nlohmann::ordered_json j;
    j["metric"] = describe(t.config);
    j["threshold"] = t.threshold;
    j["required"] = t.required;
    j["pass"] = t.pass();
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : t.rows)
        j["rows"].push_back({{"length_bits", 8 * r.length_octets},
                             {"plaintext_above", r.plaintext_above},
                             {"random_below", r.random_below},
                             {"pass", r.pass}});
    return j;
}

} // namespace privleak::sim
