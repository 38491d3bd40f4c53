#pragma once

// Intra-alarm entropy of a payload under a bit or octet symbol alphabet.
// All logarithms are base 2. Frequencies are the plug-in estimates from the
// payload's own symbol counts, no smoothing.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

#include "error.hpp"

namespace privleak {

enum class Algorithm { shannon, min };
enum class Symbol { bit, octet };

inline std::string_view to_string(Algorithm a) { return a == Algorithm::shannon ? "shannon" : "min"; }
inline std::string_view to_string(Symbol s) { return s == Symbol::bit ? "bit" : "octet"; }

inline Algorithm parse_algorithm(std::string_view s) {
    if (s == "shannon") return Algorithm::shannon;
    if (s == "min") return Algorithm::min;
    throw Error(ErrorKind::domain, "unknown entropy algorithm '" + std::string(s) + "'");
}

inline Symbol parse_symbol(std::string_view s) {
    if (s == "bit") return Symbol::bit;
    if (s == "octet") return Symbol::octet;
    throw Error(ErrorKind::domain, "unknown symbol width '" + std::string(s) + "'");
}

/// Payloads shorter than this are computed but flagged in reports; below it
/// octet entropy cannot tell plaintext from random data.
inline constexpr std::size_t reliability_floor_octets = 5;

struct EntropyConfig {
    Algorithm algorithm = Algorithm::shannon;
    Symbol symbol = Symbol::octet;
    bool normalized = false;       // divide by log2 of the alphabet size (1 or 8)
    bool length_corrected = true;

    bool operator==(const EntropyConfig&) const = default;
};

struct EntropyValue {
    double value = 0.0;
    std::size_t octets = 0; // payload length; the length-correction n
};

/// log2 of the alphabet size: 1 for bits, 8 for octets.
inline double alphabet_bits(Symbol s) { return s == Symbol::bit ? 1.0 : 8.0; }

namespace detail {

inline void require_payload(std::span<const std::uint8_t> payload) {
    if (payload.empty()) throw Error(ErrorKind::undefined_input, "entropy of an empty payload is undefined");
}

inline std::uint64_t count_ones(std::span<const std::uint8_t> payload) {
    std::uint64_t ones = 0;
    std::size_t i = 0;
    for (; i + 8 <= payload.size(); i += 8) {
        std::uint64_t word;
        std::memcpy(&word, payload.data() + i, 8);
        ones += static_cast<std::uint64_t>(std::popcount(word));
    }
    for (; i < payload.size(); ++i) ones += static_cast<std::uint64_t>(std::popcount(payload[i]));
    return ones;
}

inline std::array<std::uint32_t, 256> count_octets(std::span<const std::uint8_t> payload) {
    std::array<std::uint32_t, 256> counts{};
    for (auto b : payload) ++counts[b];
    return counts;
}

inline double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

} // namespace detail

/// Binary Shannon entropy -p log p - (1-p) log (1-p), with 0 log 0 = 0.
inline double binary_shannon_constant(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::domain, "probability outside [0,1]");
    return detail::plogp(p) + detail::plogp(1.0 - p);
}

/// log 1/(1 - 2p(1-p)): Min-entropy of a perfect binary rule's input.
inline double binary_min_constant(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::domain, "probability outside [0,1]");
    return -std::log2(1.0 - 2.0 * p * (1.0 - p));
}

inline EntropyValue shannon_entropy(std::span<const std::uint8_t> payload, Symbol symbol) {
    detail::require_payload(payload);
    const double n_octets = static_cast<double>(payload.size());
    if (symbol == Symbol::bit) {
        const double p = static_cast<double>(detail::count_ones(payload)) / (8.0 * n_octets);
        return {binary_shannon_constant(p), payload.size()};
    }
    const auto counts = detail::count_octets(payload);
    double h = 0.0;
    for (auto c : counts)
        if (c) h += detail::plogp(static_cast<double>(c) / n_octets);
    return {h, payload.size()};
}

inline EntropyValue min_entropy(std::span<const std::uint8_t> payload, Symbol symbol) {
    detail::require_payload(payload);
    const double n_octets = static_cast<double>(payload.size());
    if (symbol == Symbol::bit) {
        const double n_bits = 8.0 * n_octets;
        const double ones = static_cast<double>(detail::count_ones(payload));
        return {-std::log2(std::max(ones, n_bits - ones) / n_bits), payload.size()};
    }
    const auto counts = detail::count_octets(payload);
    const auto top = *std::max_element(counts.begin(), counts.end());
    return {-std::log2(static_cast<double>(top) / n_octets), payload.size()};
}

/// Length correction with n the payload length in octets:
///   bit symbols:   sqrt(n) * H
///   octet symbols: sqrt(n) / log2(n) * H     (n >= 2)
inline EntropyValue length_correct(EntropyValue h, Symbol symbol) {
    if (h.octets < 1) throw Error(ErrorKind::degenerate_length, "length correction needs n >= 1");
    const double n = static_cast<double>(h.octets);
    if (symbol == Symbol::bit) return {std::sqrt(n) * h.value, h.octets};
    if (h.octets == 1)
        throw Error(ErrorKind::degenerate_length, "octet length correction undefined for n = 1 (log2 1 = 0)");
    return {std::sqrt(n) / std::log2(n) * h.value, h.octets};
}

/// Full pipeline: raw entropy, optional normalization, optional correction.
inline EntropyValue entropy(std::span<const std::uint8_t> payload, const EntropyConfig& cfg) {
    EntropyValue h = cfg.algorithm == Algorithm::shannon ? shannon_entropy(payload, cfg.symbol)
                                                         : min_entropy(payload, cfg.symbol);
    if (cfg.normalized) h.value /= alphabet_bits(cfg.symbol);
    if (cfg.length_corrected) h = length_correct(h, cfg.symbol);
    return h;
}

/// True when `entropy(payload, cfg)` is defined for this payload length.
inline bool entropy_defined(std::size_t octets, const EntropyConfig& cfg) {
    if (octets == 0) return false;
    return !(cfg.length_corrected && cfg.symbol == Symbol::octet && octets < 2);
}

inline std::string describe(const EntropyConfig& cfg) {
    std::string s(to_string(cfg.algorithm));
    s += '-';
    s += to_string(cfg.symbol);
    if (cfg.normalized) s += ",normalized";
    if (cfg.length_corrected) s += ",length-corrected";
    return s;
}

} // namespace privleak
