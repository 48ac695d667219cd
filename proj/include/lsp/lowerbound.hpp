#pragma once

// Lower-bound machinery over a finite alphabet [m]: add-1/2 per-symbol
// estimates, the midrange table estimator G-hat and its error experiment,
// the block-parameter estimator theta-hat and its MSE check, and the Fano
// floor report.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lsp/bounds.hpp"
#include "lsp/core.hpp"
#include "lsp/parallel.hpp"

namespace lsp::lowerbound {

namespace detail {
inline void check_lengths(std::span<const std::size_t> x, std::span<const Bit> y) {
    if (x.size() != y.size()) throw DomainError("x and y must have equal length");
}
}  // namespace detail

/// p-hat_l = (#{x_i = l, y_i = 1} + 1/2) / (#{x_i = l} + 1).
inline std::vector<double> phat(std::span<const std::size_t> x, std::span<const Bit> y, std::size_t m) {
    detail::check_lengths(x, y);
    if (m == 0) throw DomainError("alphabet must be non-empty");
    std::vector<std::uint64_t> n(m, 0), k(m, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= m) throw DomainError("symbol out of range");
        ++n[x[i]];
        k[x[i]] += y[i];
    }
    std::vector<double> p(m);
    for (std::size_t l = 0; l < m; ++l)
        p[l] = (static_cast<double>(k[l]) + 0.5) / (static_cast<double>(n[l]) + 1.0);
    return p;
}

/// Midrange split: G-hat(l) = 0 iff p-hat_l <= (max + min) / 2.
inline std::vector<Bit> ghat(std::span<const double> p) {
    if (p.empty()) throw DomainError("ghat needs a non-empty vector");
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    const double mid = (*lo + *hi) / 2.0;
    std::vector<Bit> g(p.size());
    for (std::size_t l = 0; l < p.size(); ++l) g[l] = p[l] <= mid ? 0 : 1;
    return g;
}

/// (K_b + 1/2) / (N_b + 1) over the positions with g(x_i) = block.
inline double theta_hat(std::span<const std::size_t> x, std::span<const Bit> y, std::span<const Bit> g, Bit block) {
    detail::check_lengths(x, y);
    std::uint64_t n = 0, k = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= g.size()) throw DomainError("symbol out of range");
        if (g[x[i]] == block) {
            ++n;
            k += y[i];
        }
    }
    return (static_cast<double>(k) + 0.5) / (static_cast<double>(n) + 1.0);
}

// ---------------------------------------------------------------------------
// Prior: (theta0, theta1) uniform on {theta1 - theta0 >= 1/2}, G uniform over
// all 2^m tables.

template <class Rng>
std::pair<double, double> sample_thetas(Rng& rng) {
    for (;;) {
        const double t0 = uniform01(rng), t1 = uniform01(rng);
        if (t1 - t0 >= 0.5) return {t0, t1};
    }
}

template <class Rng>
std::vector<Bit> sample_table(Rng& rng, std::size_t m) {
    std::vector<Bit> g(m);
    for (std::size_t l = 0; l < m; ++l) g[l] = static_cast<Bit>(rng() >> 63);
    return g;
}

struct Interval {
    double lo = 0.0, hi = 0.0;
};

inline constexpr double kZ95 = 1.959964;

inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95) {
    if (trials == 0) throw DomainError("Wilson interval needs trials > 0");
    const double t = static_cast<double>(trials), p = static_cast<double>(successes) / t, z2 = z * z;
    const double denom = 1.0 + z2 / t;
    const double center = (p + z2 / (2.0 * t)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / t + z2 / (4.0 * t * t));
    return {center - half, center + half};
}

struct GhatErrorResult {
    std::size_t m = 0, n = 0, trials = 0, errors = 0;
    double rate = 0.0;
    Interval ci;
    double bound = 0.0;
    bool vacuous = false;  ///< bound >= 1

    double half_width() const { return (ci.hi - ci.lo) / 2.0; }
};

/// Trial i uses mt19937_64(seed + i).
inline GhatErrorResult ghat_error_experiment(std::size_t m, std::size_t n, std::size_t trials, std::uint64_t seed,
                                             std::size_t threads = default_threads()) {
    if (m == 0 || m > 62) throw DomainError("ghat experiment needs 1 <= m <= 62");
    if (trials < 100) throw DomainError("ghat experiment needs at least 100 trials");
    const auto wrong = parallel_map<std::uint8_t>(
        trials,
        [&](std::size_t i) -> std::uint8_t {
            std::mt19937_64 rng(seed + i);
            const auto [t0, t1] = sample_thetas(rng);
            const auto g = sample_table(rng, m);
            std::vector<std::size_t> x(n);
            std::vector<Bit> y(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = uniform_index(rng, m);
            for (std::size_t j = 0; j < n; ++j) y[j] = bernoulli(rng, g[x[j]] ? t1 : t0);
            return ghat(phat(x, y, m)) != g;
        },
        threads);
    GhatErrorResult r;
    r.m = m;
    r.n = n;
    r.trials = trials;
    for (auto w : wrong) r.errors += w;
    r.rate = static_cast<double>(r.errors) / static_cast<double>(trials);
    r.ci = wilson_interval(r.errors, trials);
    r.bound = bounds::ghat_error(n, m);
    r.vacuous = r.bound >= 1.0;
    return r;
}

// ---------------------------------------------------------------------------
// theta-hat mean-squared error, conditional on G = g.

/// E[1 / (4 (N + 1))] for N ~ Binomial(n, q).
inline double expected_quarter_inverse(std::size_t n, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("block probability must lie in [0,1]");
    if (q == 0.0) return 0.25;
    const double nn = static_cast<double>(n);
    return -std::expm1((nn + 1.0) * std::log1p(-q)) / (4.0 * (nn + 1.0) * q);
}

struct MseResult {
    std::vector<Bit> g;
    Bit block = 0;
    std::size_t m = 0, n = 0, trials = 0;
    double mse = 0.0, se = 0.0;
    double bound = 0.0;  ///< E[1/(4(N_b + 1))]
};

/// For every table g over [m] and both blocks: the empirical E[(Theta_b -
/// theta-hat_b)^2] with X uniform on [m] and (Theta0, Theta1) from the prior.
/// Table g uses seeds seed + code * trials + i.
inline std::vector<MseResult> theta_mse_experiment(std::size_t m, std::size_t n, std::size_t trials, std::uint64_t seed,
                                                   std::size_t threads = default_threads()) {
    if (m == 0 || m > 16) throw DomainError("theta MSE experiment needs 1 <= m <= 16");
    if (trials < 2) throw DomainError("theta MSE experiment needs at least 2 trials");
    std::vector<MseResult> out;
    const std::size_t tables = std::size_t{1} << m;
    for (std::size_t code = 0; code < tables; ++code) {
        std::vector<Bit> g(m);
        std::size_t zeros = 0;
        for (std::size_t l = 0; l < m; ++l) {
            g[l] = static_cast<Bit>((code >> l) & 1u);
            zeros += g[l] == 0;
        }
        using Sq = std::array<double, 2>;
        const auto sq = parallel_map<Sq>(
            trials,
            [&](std::size_t i) -> Sq {
                std::mt19937_64 rng(seed + code * trials + i);
                const auto [t0, t1] = sample_thetas(rng);
                std::vector<std::size_t> x(n);
                std::vector<Bit> y(n);
                for (std::size_t j = 0; j < n; ++j) x[j] = uniform_index(rng, m);
                for (std::size_t j = 0; j < n; ++j) y[j] = bernoulli(rng, g[x[j]] ? t1 : t0);
                const double e0 = t0 - theta_hat(x, y, g, 0), e1 = t1 - theta_hat(x, y, g, 1);
                return {e0 * e0, e1 * e1};
            },
            threads);
        for (Bit b : {Bit{0}, Bit{1}}) {
            MseResult r{g, b, m, n, trials};
            double s = 0.0, ss = 0.0;
            for (const auto& v : sq) s += v[b];
            r.mse = s / static_cast<double>(trials);
            for (const auto& v : sq) ss += (v[b] - r.mse) * (v[b] - r.mse);
            r.se = std::sqrt(ss / static_cast<double>(trials - 1) / static_cast<double>(trials));
            const double q = static_cast<double>(b == 0 ? zeros : m - zeros) / static_cast<double>(m);
            r.bound = expected_quarter_inverse(n, q);
            out.push_back(std::move(r));
        }
    }
    return out;
}

inline bounds::BoundReport fano_floor_report(std::size_t n, std::size_t m) {
    return {"fano_floor", n, m, bounds::kDefaultC, 0.0, bounds::fano_floor(n, m)};
}

}  // namespace lsp::lowerbound
