#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>

#include <privleak/leakage.hpp>
#include <privleak/simulation.hpp>

using namespace privleak;
using namespace privleak::sim;

namespace {

const Corpus& corpus() {
    static const Corpus c = Corpus::load(PRIVLEAK_DATA_DIR "/corpus/moby_dick.txt");
    return c;
}

EntropyConfig cfg(Algorithm a, Symbol s, bool corrected = true) {
    EntropyConfig c;
    c.algorithm = a;
    c.symbol = s;
    c.length_corrected = corrected;
    return c;
}

} // namespace

TEST(Payload, RandomUniformChiSquare) {
    // 125000 payloads of 8 octets = 10^6 octets, 255 degrees of freedom
    std::array<double, 256> counts{};
    Rng rng(2024);
    Bytes p(8);
    for (int i = 0; i < 125000; ++i) {
        gen_payload(Source::random_uniform, rng, p);
        for (auto b : p) counts[b] += 1;
    }
    const double expected = 1e6 / 256;
    double chi2 = 0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi2, 330.5); // upper 0.1% point of chi-square(255)
    EXPECT_GT(chi2, 190.0); // and not suspiciously flat
}

TEST(Payload, PlaintextIsVerbatimSlice) {
    const auto& text = corpus().text;
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto p = gen_payload(Source::plaintext_corpus, 1 + rng() % 500, rng, &corpus());
        auto it = std::search(text.begin(), text.end(), p.begin(), p.end());
        EXPECT_NE(it, text.end());
    }
}

TEST(Payload, Base64Alphabet) {
    const std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/=";
    Rng rng(4);
    for (std::size_t n = 1; n < 200; ++n) {
        const auto p = gen_payload(Source::base64_random, n, rng);
        ASSERT_EQ(p.size(), n);
        for (auto b : p) EXPECT_NE(alphabet.find(static_cast<char>(b)), std::string::npos);
    }
}

TEST(Payload, Base64KnownVectors) {
    auto enc = [](std::string s) { return base64_encode(Bytes(s.begin(), s.end())); };
    EXPECT_EQ(enc(""), "");
    EXPECT_EQ(enc("f"), "Zg==");
    EXPECT_EQ(enc("fo"), "Zm8=");
    EXPECT_EQ(enc("foo"), "Zm9v");
    EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
}

TEST(Payload, Errors) {
    Rng rng(5);
    EXPECT_THROW(gen_payload(Source::plaintext_corpus, 10, rng, nullptr), Error);
    Corpus tiny;
    tiny.text = Bytes{'a', 'b'};
    EXPECT_THROW(gen_payload(Source::plaintext_corpus, 3, rng, &tiny), Error);
    EXPECT_THROW(gen_payload(Source::random_uniform, 0, rng), Error);
    EXPECT_THROW(Corpus::load("/nonexistent/corpus.txt"), Error);
}

TEST(Config, Validation) {
    SimConfig sc;
    sc.lengths = {8};
    EXPECT_NO_THROW(sc.validate());
    sc.ensemble = 0;
    EXPECT_THROW(sc.validate(), Error);
    sc.ensemble = 1;
    sc.samples_per_experiment = 1;
    EXPECT_THROW(sc.validate(), Error);
    sc.samples_per_experiment = 2;
    sc.lengths = {1}; // octet correction undefined
    EXPECT_THROW(sc.validate(), Error);
    EXPECT_EQ(ensemble_size(parse_profile("paper")), 10000u);
    EXPECT_EQ(ensemble_size(parse_profile("desk")), 2000u);
    EXPECT_EQ(ensemble_size(parse_profile("ci")), 200u);
    EXPECT_THROW(parse_profile("huge"), Error);
}

TEST(Stats, Percentile) {
    std::vector<double> v{4, 1, 3, 2, 5};
    EXPECT_DOUBLE_EQ(percentile(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(percentile(v, 1.0), 5.0);
    EXPECT_DOUBLE_EQ(percentile(v, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(percentile(v, 0.125), 1.5);
    const auto b = band_of(v);
    EXPECT_LE(b.p2_5, b.mean);
    EXPECT_LE(b.mean, b.p97_5);
}

TEST(Fit, ExactPowerLaw) {
    std::vector<CurvePoint> pts;
    for (std::size_t n : {8u, 16u, 32u, 64u, 128u}) {
        const double bits = 8.0 * static_cast<double>(n);
        pts.push_back({n, {std::pow(2.0, 1.5) * std::pow(bits, -0.75), 0, 0}});
    }
    const auto f = fit_loglog(pts, 0);
    EXPECT_NEAR(f.psi, -0.75, 1e-12);
    EXPECT_NEAR(f.gamma, 1.5, 1e-12);
    EXPECT_EQ(f.points, 5u);
    EXPECT_EQ(fit_loglog(pts, 32).points, 3u);
    EXPECT_THROW(fit_loglog(pts, 128), Error);
}

TEST(Ensemble, ConstantPayloadSigmaIsZero) {
    // every sample is the same payload, so sigma is exactly 0
    std::vector<double> h(50, entropy(Bytes(64, 0x41), EntropyConfig{}).value);
    EXPECT_EQ(sigma_normal(h), 0.0);
    Corpus flat;
    flat.text = Bytes(5000, 'x');
    const std::array<EntropyConfig, 1> one{EntropyConfig{}};
    const auto sig = ensemble_sigmas(Source::plaintext_corpus, 64, one, 20, 50, 1, &flat);
    for (double s : sig[0]) EXPECT_EQ(s, 0.0);
}

TEST(Ensemble, SeedDeterminismAndThreadIndependence) {
    const std::array<EntropyConfig, 2> m{cfg(Algorithm::shannon, Symbol::octet), cfg(Algorithm::min, Symbol::bit)};
    const auto a = ensemble_sigmas(Source::random_uniform, 40, m, 64, 50, 77, nullptr, 1);
    const auto b = ensemble_sigmas(Source::random_uniform, 40, m, 64, 50, 77, nullptr, 3);
    const auto c = ensemble_sigmas(Source::random_uniform, 40, m, 64, 50, 78, nullptr, 1);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(Bias, QuickSlopes) {
    SimConfig sc;
    sc.lengths = power_of_two_lengths(6, 14);
    sc.ensemble = 150;
    sc.jobs = 2;
    const std::array<EntropyConfig, 2> m{cfg(Algorithm::shannon, Symbol::bit, false),
                                         cfg(Algorithm::min, Symbol::bit, false)};
    const auto curves = bias_curves(sc, m);
    ASSERT_TRUE(curves[0].fit && curves[1].fit);
    EXPECT_NEAR(curves[0].fit->psi, -1.0, 0.08);
    EXPECT_NEAR(curves[1].fit->psi, -0.5, 0.08);
    for (const auto& c : curves)
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            const auto& b = c.points[i].band;
            EXPECT_GT(b.mean, 0.0);
            EXPECT_LE(b.p2_5, b.mean);
            EXPECT_LE(b.mean, b.p97_5);
            if (i) EXPECT_LT(b.mean, c.points[i - 1].band.mean);
        }
}

TEST(Separation, ShannonOctetQuick) {
    SimConfig sc;
    sc.lengths = {5, 16, 100, 400};
    sc.ensemble = 200;
    sc.config = cfg(Algorithm::shannon, Symbol::octet);
    const auto c = separation_curve(sc, corpus());
    ASSERT_EQ(c.points.size(), 4u);
    for (const auto& p : c.points) EXPECT_TRUE(p.distinguishable()) << p.length_octets;
    ASSERT_TRUE(c.onset());
    EXPECT_EQ(*c.onset(), 5u);
}

TEST(Separation, OnsetNeedsEveryLongerLength) {
    SeparationCurve c;
    auto pt = [](std::size_t n, bool ok) {
        SeparationPoint p;
        p.length_octets = n;
        p.plaintext = {1, ok ? 0.9 : 0.1, 1.1};
        p.other = {0.5, 0.2, 0.6};
        return p;
    };
    c.points = {pt(5, true), pt(8, false), pt(16, true), pt(32, true)};
    EXPECT_EQ(c.onset(), 16u);
    c.points.back() = pt(32, false);
    EXPECT_FALSE(c.onset());
}

TEST(Threshold, RandomFallsBelowQuick) {
    SimConfig sc;
    sc.lengths = {100, 256};
    sc.ensemble = 200;
    sc.config = cfg(Algorithm::shannon, Symbol::octet);
    const auto t = threshold_check(sc, corpus(), 0.14);
    ASSERT_EQ(t.rows.size(), 2u);
    for (const auto& r : t.rows) EXPECT_GE(r.random_below, 0.95);
}

TEST(Emission, CurveCsv) {
    std::vector<CurvePoint> pts{{8, {0.5, 0.25, 0.75}}};
    EXPECT_EQ(curve_csv(pts), "length_bits,mean_sigma,p2_5,p97_5\n64,0.5,0.25,0.75\n");
}
