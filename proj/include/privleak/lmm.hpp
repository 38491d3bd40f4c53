#pragma once

// Univariate Laplacian mixture model fitted by expectation-maximisation.
//
// The M-step takes each component's median from the cumulative-weight
// median (averaging branch included) and its scale from the weighted mean
// absolute deviation about that median. Iteration stops on the minimum
// message length criterion, but only after a minimum number of iterations
// (40 on the first run, 20 after an analyst edit). Between convergence
// episodes an analyst may delete components, assert a mode for a component,
// or pick a mode position from the histogram.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace privleak::lmm {

inline constexpr double lambda_floor = 1e-6;
inline constexpr double log_density_floor = -700.0; // below this a sample is "unexplained"
inline constexpr double weight_floor = 1e-300;       // inside the MML log-weight sum
inline constexpr std::size_t recommended_samples = 50;

struct LaplaceComponent {
    double median = 0;
    double lambda = 0;
    double beta = 0;
    bool deleted = false;

    static LaplaceComponent zeroed() { return {0.0, 0.0, 0.0, true}; }
    bool operator==(const LaplaceComponent&) const = default;
};

struct MixtureModel {
    std::vector<LaplaceComponent> components;
    double mml = 0;
    std::size_t iterations = 0;
    bool converged = false;

    std::size_t live() const {
        return static_cast<std::size_t>(
            std::count_if(components.begin(), components.end(), [](const auto& c) { return !c.deleted; }));
    }
    bool operator==(const MixtureModel&) const = default;
};

/// N x K matrix of component memberships, row-major.
class Responsibilities {
public:
    Responsibilities() = default;
    Responsibilities(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), w_(rows * cols, 0.0) {}

    double& operator()(std::size_t i, std::size_t k) { return w_[i * cols_ + k]; }
    double operator()(std::size_t i, std::size_t k) const { return w_[i * cols_ + k]; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::vector<double> column(std::size_t k) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, k);
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> w_;
};

inline double laplace_pdf(double x, double median, double lambda) {
    if (!(lambda > 0.0)) throw Error(ErrorKind::domain, "Laplace scale must be > 0");
    return std::exp(-std::abs(x - median) / lambda) / (2.0 * lambda);
}

inline double laplace_log_pdf(double x, double median, double lambda) {
    return -std::abs(x - median) / lambda - std::log(2.0 * lambda);
}

/// Cumulative-weight median over ascending values. With q_i the running
/// weight sum and h = q_N / 2, returns the value where q_i == h, or the
/// average of the two values straddling h. When the first weight alone
/// exceeds h there is no lower neighbour and the first value is returned.
inline double weighted_median(std::span<const double> sorted, std::span<const double> weights) {
    if (sorted.size() != weights.size()) throw Error(ErrorKind::contract, "values and weights differ in length");
    if (sorted.empty()) throw Error(ErrorKind::undefined_input, "weighted median of an empty sample");
    if (!std::is_sorted(sorted.begin(), sorted.end()))
        throw Error(ErrorKind::contract, "weighted median requires ascending values");
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::domain, "weights must be finite and >= 0");

    std::vector<double> q(weights.size());
    std::partial_sum(weights.begin(), weights.end(), q.begin());
    if (!(q.back() > 0.0)) throw Error(ErrorKind::domain, "weights are all zero");
    const double half = 0.5 * q.back();
    const auto i = static_cast<std::size_t>(std::lower_bound(q.begin(), q.end(), half) - q.begin());
    if (q[i] == half || i == 0) return sorted[i];
    return (sorted[i] + sorted[i - 1]) / 2.0;
}

inline void check_model(const MixtureModel& model) {
    if (model.live() == 0) throw Error(ErrorKind::domain, "mixture has no live components");
}

inline Responsibilities e_step(std::span<const double> samples, const MixtureModel& model) {
    check_model(model);
    const auto& comps = model.components;
    const std::size_t K = comps.size();
    Responsibilities w(samples.size(), K);
    std::vector<double> logd(K);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double x = samples[i];
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
            if (comps[k].deleted || comps[k].beta <= 0.0) {
                logd[k] = -std::numeric_limits<double>::infinity();
                continue;
            }
            logd[k] = std::log(comps[k].beta) + laplace_log_pdf(x, comps[k].median, comps[k].lambda);
            top = std::max(top, logd[k]);
        }
        if (top < log_density_floor) {
            // every density underflows: hand the sample to the nearest median
            std::size_t best = K;
            for (std::size_t k = 0; k < K; ++k) {
                if (comps[k].deleted) continue;
                if (best == K || std::abs(x - comps[k].median) < std::abs(x - comps[best].median)) best = k;
            }
            w(i, best) = 1.0;
            continue;
        }
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double e = std::isinf(logd[k]) ? 0.0 : std::exp(logd[k] - top);
            w(i, k) = e;
            total += e;
        }
        for (std::size_t k = 0; k < K; ++k) w(i, k) /= total;
    }
    return w;
}

struct MStepResult {
    MixtureModel model;
    std::vector<std::size_t> degenerate; // components that attracted no weight
};

/// Re-estimates median, scale and mixing weight of every live component.
/// `samples` must be ascending. A component whose total weight is zero is
/// deleted and reported as degenerate.
inline MStepResult m_step(std::span<const double> samples, const Responsibilities& w, const MixtureModel& prev) {
    if (w.rows() != samples.size() || w.cols() != prev.components.size())
        throw Error(ErrorKind::contract, "responsibilities do not match samples and model");
    MStepResult out;
    out.model = prev;
    auto& comps = out.model.components;
    const std::size_t K = comps.size();

    std::vector<double> mass(K, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i)
        for (std::size_t k = 0; k < K; ++k) {
            mass[k] += w(i, k);
            grand += w(i, k);
        }

    for (std::size_t k = 0; k < K; ++k) {
        if (comps[k].deleted) continue;
        if (!(mass[k] > 0.0)) {
            comps[k] = LaplaceComponent::zeroed();
            out.degenerate.push_back(k);
            continue;
        }
        const auto col = w.column(k);
        const double med = weighted_median(samples, col);
        double dev = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) dev += col[i] * std::abs(samples[i] - med);
        comps[k].median = med;
        comps[k].lambda = std::max(lambda_floor, dev / mass[k]);
        comps[k].beta = mass[k] / grand;
    }
    if (out.model.live() == 0) throw Error(ErrorKind::domain, "every component degenerated");
    return out;
}

/// Message length in bits:
///   sum_k log(N b_k / 12) + K/2 log(N/12) + 3K/2 - max_k sum_i log w_ik
/// over the live components (K = live count).
inline double mml(const MixtureModel& model, const Responsibilities& w, std::size_t n) {
    check_model(model);
    if (n == 0) throw Error(ErrorKind::undefined_input, "MML needs N >= 1");
    const double N = static_cast<double>(n);
    double cost = 0.0;
    double best_fit = -std::numeric_limits<double>::infinity();
    std::size_t K = 0;
    for (std::size_t k = 0; k < model.components.size(); ++k) {
        const auto& c = model.components[k];
        if (c.deleted) continue;
        ++K;
        cost += std::log2(N * c.beta / 12.0);
        double fit = 0.0;
        for (std::size_t i = 0; i < w.rows(); ++i) fit += std::log2(std::max(w(i, k), weight_floor));
        best_fit = std::max(best_fit, fit);
    }
    const double Kd = static_cast<double>(K);
    return cost + Kd / 2.0 * std::log2(N / 12.0) + 1.5 * Kd - best_fit;
}

/// Mixture log-likelihood sum_i log sum_k b_k L(x_i | k), natural log.
inline double log_likelihood(std::span<const double> samples, const MixtureModel& model) {
    double ll = 0.0;
    for (double x : samples) {
        double top = -std::numeric_limits<double>::infinity();
        for (const auto& c : model.components)
            if (!c.deleted && c.beta > 0) top = std::max(top, std::log(c.beta) + laplace_log_pdf(x, c.median, c.lambda));
        double s = 0.0;
        for (const auto& c : model.components)
            if (!c.deleted && c.beta > 0) s += std::exp(std::log(c.beta) + laplace_log_pdf(x, c.median, c.lambda) - top);
        ll += top + std::log(s);
    }
    return ll;
}

struct KMeansInit {
    MixtureModel model;
    std::size_t requested = 0;
    std::optional<std::string> warning;
};

/// Lloyd's k-means on the line with k-means++ seeding; centers become the
/// initial medians, ordered ascending. Scales start at the within-cluster
/// mean absolute deviation and weights at the cluster fractions.
inline KMeansInit kmeans_init(std::span<const double> samples, std::size_t K, std::uint64_t seed = 0) {
    if (samples.empty()) throw Error(ErrorKind::undefined_input, "k-means on an empty sample");
    if (K == 0) throw Error(ErrorKind::domain, "K must be >= 1");
    KMeansInit out;
    out.requested = K;

    std::vector<double> distinct(samples.begin(), samples.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (K > distinct.size()) {
        out.warning = "K=" + std::to_string(K) + " exceeds the " + std::to_string(distinct.size()) +
                      " distinct values; using K=" + std::to_string(distinct.size());
        K = distinct.size();
    }

    std::mt19937_64 rng(seed);
    auto uniform01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    std::vector<double> centers;
    if (K == 1) {
        centers.push_back(std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size()));
    } else {
        // seed among distinct values so that no two centers coincide
        centers.push_back(distinct[static_cast<std::size_t>(uniform01() * static_cast<double>(distinct.size()))]);
        std::vector<double> d2(distinct.size());
        while (centers.size() < K) {
            double total = 0.0;
            for (std::size_t j = 0; j < distinct.size(); ++j) {
                double best = std::numeric_limits<double>::infinity();
                for (double c : centers) best = std::min(best, (distinct[j] - c) * (distinct[j] - c));
                d2[j] = best;
                total += best;
            }
            double target = uniform01() * total;
            std::size_t pick = 0;
            for (; pick + 1 < distinct.size(); ++pick) {
                if (d2[pick] > 0.0 && target < d2[pick]) break;
                target -= d2[pick];
            }
            while (d2[pick] == 0.0) pick = (pick + 1) % distinct.size();
            centers.push_back(distinct[pick]);
        }
    }

    std::vector<std::size_t> label(samples.size(), 0);
    auto nearest = [&](double x) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < centers.size(); ++k)
            if (std::abs(x - centers[k]) < std::abs(x - centers[best])) best = k;
        return best;
    };
    if (K > 1) {
        for (int iter = 0; iter < 300; ++iter) {
            bool changed = iter == 0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                const auto l = nearest(samples[i]);
                if (l != label[i]) changed = true;
                label[i] = l;
            }
            std::vector<double> sum(K, 0.0);
            std::vector<std::size_t> cnt(K, 0);
            for (std::size_t i = 0; i < samples.size(); ++i) {
                sum[label[i]] += samples[i];
                ++cnt[label[i]];
            }
            for (std::size_t k = 0; k < K; ++k)
                if (cnt[k]) centers[k] = sum[k] / static_cast<double>(cnt[k]);
            if (!changed) break;
        }
        for (std::size_t i = 0; i < samples.size(); ++i) label[i] = nearest(samples[i]);
    }

    const double N = static_cast<double>(samples.size());
    std::vector<LaplaceComponent> comps(K);
    std::vector<std::size_t> cnt(K, 0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        comps[label[i]].lambda += std::abs(samples[i] - centers[label[i]]);
        ++cnt[label[i]];
    }
    for (std::size_t k = 0; k < K; ++k) {
        comps[k].median = centers[k];
        comps[k].lambda = std::max(lambda_floor, cnt[k] ? comps[k].lambda / static_cast<double>(cnt[k]) : 0.0);
        comps[k].beta = static_cast<double>(cnt[k]) / N;
    }
    // an empty cluster keeps a small share so it can still attract samples
    for (auto& c : comps)
        if (c.beta == 0.0) c.beta = 1.0 / N;
    std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.median < b.median; });
    double bsum = 0.0;
    for (const auto& c : comps) bsum += c.beta;
    for (auto& c : comps) c.beta /= bsum;
    out.model.components = std::move(comps);
    return out;
}

// ---------------------------------------------------------------------------
// Analyst edits

struct SetCluster {
    std::size_t index; // may equal the component count to append a component
    double median;
};
struct DeleteClusters {
    std::vector<std::size_t> indices;
};
struct PickCluster {
    double x;
};
using Edit = std::variant<SetCluster, DeleteClusters, PickCluster>;

struct EditOutcome {
    MixtureModel model;
    std::size_t affected = 0; // component set, resurrected, or moved
};

namespace detail {

inline void renormalize(MixtureModel& m) {
    double total = 0.0;
    for (const auto& c : m.components)
        if (!c.deleted) total += c.beta;
    for (auto& c : m.components)
        if (!c.deleted) c.beta = total > 0 ? c.beta / total : 1.0 / static_cast<double>(m.live());
}

/// Scale for a component re-anchored at `median`: mean absolute deviation of
/// the samples whose nearest live median is this one.
inline double reseed_lambda(std::span<const double> samples, const MixtureModel& m, std::size_t self) {
    const double mu = m.components[self].median;
    double dev = 0.0;
    std::size_t cnt = 0;
    for (double x : samples) {
        bool mine = true;
        for (std::size_t k = 0; k < m.components.size() && mine; ++k)
            if (k != self && !m.components[k].deleted &&
                std::abs(x - m.components[k].median) < std::abs(x - mu))
                mine = false;
        if (mine) {
            dev += std::abs(x - mu);
            ++cnt;
        }
    }
    if (cnt == 0) {
        for (double x : samples) dev += std::abs(x - mu);
        cnt = samples.size() * std::max<std::size_t>(1, m.live());
    }
    return std::max(lambda_floor, dev / static_cast<double>(std::max<std::size_t>(cnt, 1)));
}

inline void anchor(std::span<const double> samples, MixtureModel& m, std::size_t k, double median) {
    auto& c = m.components[k];
    const bool revive = c.deleted;
    c.deleted = false;
    c.median = median;
    if (revive) c.beta = 1.0 / static_cast<double>(m.live());
    c.lambda = reseed_lambda(samples, m, k);
    renormalize(m);
}

} // namespace detail

/// Applies one analyst edit. `samples` is the fitted data, used to reseed the
/// scale of re-anchored components. Invalid edits throw and leave `model`
/// untouched.
inline EditOutcome apply_edit(std::span<const double> samples, const MixtureModel& model, const Edit& edit) {
    EditOutcome out{model, 0};
    auto& m = out.model;
    const std::size_t K = m.components.size();

    if (const auto* set = std::get_if<SetCluster>(&edit)) {
        if (set->index > K)
            throw Error(ErrorKind::index, "setcl: no cluster " + std::to_string(set->index + 1));
        if (!std::isfinite(set->median)) throw Error(ErrorKind::domain, "setcl: median must be finite");
        if (set->index == K) m.components.push_back(LaplaceComponent::zeroed());
        detail::anchor(samples, m, set->index, set->median);
        out.affected = set->index;
    } else if (const auto* del = std::get_if<DeleteClusters>(&edit)) {
        if (del->indices.empty()) throw Error(ErrorKind::domain, "delcl: empty cluster list");
        for (auto k : del->indices)
            if (k >= K) throw Error(ErrorKind::index, "delcl: no cluster " + std::to_string(k + 1));
        for (auto k : del->indices) m.components[k] = LaplaceComponent::zeroed();
        if (m.live() == 0) throw Error(ErrorKind::domain, "delcl: at least one cluster must remain");
        detail::renormalize(m);
        out.affected = del->indices.front();
    } else {
        const double x = std::get<PickCluster>(edit).x;
        if (samples.empty()) throw Error(ErrorKind::undefined_input, "pickcl: no data");
        const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
        if (!(x >= *lo && x <= *hi)) throw Error(ErrorKind::domain, "pickcl: x outside the data range");
        std::size_t target = K;
        for (std::size_t k = 0; k < K && target == K; ++k)
            if (m.components[k].deleted) target = k;
        if (target == K) {
            target = 0;
            for (std::size_t k = 1; k < K; ++k)
                if (m.components[k].beta < m.components[target].beta) target = k;
        }
        detail::anchor(samples, m, target, x);
        out.affected = target;
    }
    m.converged = false;
    return out;
}

// ---------------------------------------------------------------------------
// Per-cluster and per-rule leakage

struct ComponentLeakage {
    double median = 0;
    double beta = 0;
    double mean = 0;          // responsibility-weighted mean
    double sigma_model = 0;   // sqrt(2) * lambda
    double sigma_normal = 0;  // weighted, about the weighted mean
    double sigma_laplace = 0; // weighted, about the median
    bool deleted = false;
    bool at_floor = false; // lambda at the floor; sigma_model taken from data
};

struct ClusterLeakage {
    std::vector<ComponentLeakage> components;
    double rule_sigma_model = 0;
    double rule_sigma_normal = 0;
    double rule_sigma_laplace = 0;
};

inline ClusterLeakage cluster_leakage(std::span<const double> samples, const Responsibilities& w,
                                      const MixtureModel& model) {
    ClusterLeakage out;
    for (std::size_t k = 0; k < model.components.size(); ++k) {
        const auto& c = model.components[k];
        ComponentLeakage cl;
        cl.deleted = c.deleted;
        if (c.deleted) {
            out.components.push_back(cl);
            continue;
        }
        cl.median = c.median;
        cl.beta = c.beta;
        double mass = 0.0, first = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            mass += w(i, k);
            first += w(i, k) * samples[i];
        }
        if (mass > 0.0) {
            cl.mean = first / mass;
            double sq = 0.0, ab = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                sq += w(i, k) * (samples[i] - cl.mean) * (samples[i] - cl.mean);
                ab += w(i, k) * std::abs(samples[i] - c.median);
            }
            cl.sigma_normal = std::sqrt(sq / mass);
            cl.sigma_laplace = std::sqrt(2.0) * ab / mass;
        }
        cl.at_floor = c.lambda <= lambda_floor;
        cl.sigma_model = cl.at_floor ? cl.sigma_laplace : std::sqrt(2.0) * c.lambda;
        out.rule_sigma_model += c.beta * cl.sigma_model;
        out.rule_sigma_normal += c.beta * cl.sigma_normal;
        out.rule_sigma_laplace += c.beta * cl.sigma_laplace;
        out.components.push_back(cl);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fitting driver

struct FitOptions {
    double epsilon = 1e-4;
    std::size_t min_iterations_initial = 40;
    std::size_t min_iterations_after_edit = 20;
    std::size_t max_iterations = 2000; // per convergence episode
    std::uint64_t seed = 0;            // k-means++ seeding
};

/// EM state machine over one sample. `run()` iterates to the next
/// convergence; `apply()` edits the model between runs.
class Fitter {
public:
    Fitter(std::span<const double> samples, std::size_t k_init, FitOptions opts = {})
        : samples_(samples.begin(), samples.end()), opts_(opts) {
        if (samples_.empty()) throw Error(ErrorKind::undefined_input, "cannot fit an empty sample");
        if (k_init == 0) throw Error(ErrorKind::domain, "k_init must be >= 1");
        std::sort(samples_.begin(), samples_.end());
        auto init = kmeans_init(samples_, k_init, opts_.seed);
        if (init.warning) warnings_.push_back(*init.warning);
        if (samples_.size() < recommended_samples)
            warnings_.push_back("only " + std::to_string(samples_.size()) + " samples; at least " +
                                std::to_string(recommended_samples) + " are recommended");
        model_ = std::move(init.model);
        w_ = e_step(samples_, model_);
        model_.mml = mml(model_, w_, samples_.size());
    }

    /// Iterates E and M steps until |delta MML| < epsilon after the episode's
    /// minimum iteration count, or until the iteration cap. On hitting the
    /// cap the lowest-MML model seen in the episode is kept, flagged
    /// unconverged. Returns whether the episode converged.
    bool run() {
        const std::size_t min_iter = edited_ ? opts_.min_iterations_after_edit : opts_.min_iterations_initial;
        MixtureModel best = model_;
        double prev = model_.mml;
        for (std::size_t it = 1; it <= opts_.max_iterations; ++it) {
            auto step = m_step(samples_, e_step(samples_, model_), model_);
            for (auto k : step.degenerate)
                warnings_.push_back("cluster " + std::to_string(k + 1) + " attracted no weight and was deleted");
            model_ = std::move(step.model);
            w_ = e_step(samples_, model_);
            model_.mml = mml(model_, w_, samples_.size());
            ++model_.iterations;
            if (model_.mml < best.mml || it == 1) best = model_;
            const bool settled = std::abs(model_.mml - prev) < opts_.epsilon;
            prev = model_.mml;
            if (it >= min_iter && settled) {
                model_.converged = true;
                pending_since_convergence_ = false;
                ++episodes_;
                return true;
            }
        }
        const auto iterations = model_.iterations;
        model_ = best;
        model_.iterations = iterations;
        model_.converged = false;
        w_ = e_step(samples_, model_);
        pending_since_convergence_ = false;
        ++episodes_;
        return false;
    }

    EditOutcome apply(const Edit& edit) {
        auto out = apply_edit(samples_, model_, edit);
        model_ = out.model;
        w_ = e_step(samples_, model_);
        model_.mml = mml(model_, w_, samples_.size());
        edited_ = true;
        pending_since_convergence_ = true;
        return out;
    }

    ClusterLeakage leakage() const { return cluster_leakage(samples_, w_, model_); }

    const MixtureModel& model() const { return model_; }
    const Responsibilities& responsibilities() const { return w_; }
    std::span<const double> samples() const { return samples_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    bool edited_since_convergence() const { return pending_since_convergence_; }
    std::size_t episodes() const { return episodes_; }

private:
    std::vector<double> samples_; // ascending
    FitOptions opts_;
    MixtureModel model_;
    Responsibilities w_;
    std::vector<std::string> warnings_;
    bool edited_ = false;
    bool pending_since_convergence_ = false;
    std::size_t episodes_ = 0;
};

/// Called after each convergence; returning no edits finalizes the fit.
using EditCallback = std::function<std::vector<Edit>(const Fitter&)>;

struct FitResult {
    MixtureModel model;
    ClusterLeakage leakage;
    std::vector<std::string> warnings;
};

inline FitResult fit(std::span<const double> samples, std::size_t k_init, const EditCallback& callback = {},
                     FitOptions opts = {}) {
    Fitter fitter(samples, k_init, opts);
    fitter.run();
    while (callback) {
        auto edits = callback(fitter);
        if (edits.empty()) break;
        for (const auto& e : edits) fitter.apply(e);
        fitter.run();
    }
    return {fitter.model(), fitter.leakage(), fitter.warnings()};
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const MixtureModel& m) {
    nlohmann::ordered_json j;
    j["components"] = nlohmann::ordered_json::array();
    for (const auto& c : m.components)
        j["components"].push_back({{"median", c.median}, {"lambda", c.lambda}, {"beta", c.beta}, {"deleted", c.deleted}});
    j["mml"] = m.mml;
    j["iterations"] = m.iterations;
    j["converged"] = m.converged;
    return j;
}

inline MixtureModel model_from_json(const nlohmann::json& j) {
    MixtureModel m;
    for (const auto& c : j.at("components"))
        m.components.push_back({c.at("median").get<double>(), c.at("lambda").get<double>(), c.at("beta").get<double>(),
                                c.at("deleted").get<bool>()});
    m.mml = j.at("mml").get<double>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.converged = j.at("converged").get<bool>();
    return m;
}

inline nlohmann::ordered_json to_json(const ClusterLeakage& l) {
    nlohmann::ordered_json j;
    j["components"] = nlohmann::ordered_json::array();
    for (const auto& c : l.components)
        j["components"].push_back({{"median", c.median},
                                   {"beta", c.beta},
                                   {"mean", c.mean},
                                   {"sigma_model", c.sigma_model},
                                   {"sigma_normal", c.sigma_normal},
                                   {"sigma_laplace", c.sigma_laplace},
                                   {"deleted", c.deleted}});
    j["rule"] = {{"sigma_model", l.rule_sigma_model},
                 {"sigma_normal", l.rule_sigma_normal},
                 {"sigma_laplace", l.rule_sigma_laplace}};
    return j;
}

} // namespace privleak::lmm
