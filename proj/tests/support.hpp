#pragma once

// Shared test fixtures and reference implementations. Nothing here calls
// into the library code it is used to check.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace testing_support {

inline double laplace_draw(std::mt19937_64& rng, double mu, double lambda) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    const double x = u(rng);
    return mu - lambda * (x < 0 ? -1.0 : 1.0) * std::log(1 - 2 * std::abs(x));
}

/// 50/50 mixture of Laplace(2, 0.1) and Laplace(6, 0.1).
inline std::vector<double> bimodal(std::size_t n, std::uint64_t seed, double a = 2.0, double b = 6.0,
                                   double lambda = 0.1) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = laplace_draw(rng, i % 2 ? b : a, lambda);
    return out;
}

/// Literal trace of the cumulative-weight median: q_0 = 0, q_i running sums,
/// scan i = 1..N for q_i > q_N/2 > q_{i-1} (average of H_i and H_{i-1}) or
/// q_i == q_N/2 (H_i). H_0 does not exist; when the first value alone
/// crosses the half it is returned unaveraged. All-zero weights have no answer.
inline std::optional<double> trace_wmedian(const std::vector<double>& H, const std::vector<double>& w) {
    const std::size_t N = H.size();
    std::vector<double> q(N + 1, 0.0);
    double sum = 0;
    for (std::size_t i = 1; i <= N; ++i) {
        sum += w[i - 1];
        q[i] = sum;
    }
    if (q[N] == 0) return std::nullopt;
    const double half = q[N] / 2;
    for (std::size_t i = 1; i <= N; ++i) {
        if (q[i] > half && half > q[i - 1]) return i == 1 ? H[0] : (H[i - 1] + H[i - 2]) / 2;
        if (q[i] == half) return H[i - 1];
    }
    return std::nullopt;
}

} // namespace testing_support
