#pragma once

// Closed-form regret bounds and lower-bound floors, all in bits.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "lsp/core.hpp"

namespace lsp::bounds {

inline constexpr double kDefaultC = 250.0;

/// log2(pi^2 / 8).
inline double log2_pi2_over_8() { return std::log2(std::numbers::pi * std::numbers::pi / 8.0); }

namespace detail {
inline double nn(std::size_t n) { return static_cast<double>(n); }
inline double two_sqrt_e() { return 2.0 * std::sqrt(std::numbers::e); }
}  // namespace detail

inline double blockkt(std::size_t n) { return std::log2(detail::nn(n) / 2.0 + 1.0) + log2_pi2_over_8(); }

inline double finite_class(std::size_t n, std::size_t class_size) {
    return std::log2(detail::nn(class_size)) + blockkt(n);
}

inline double noncausal(std::size_t n, std::size_t d) {
    const double dd = detail::nn(d);
    return dd * std::log2(std::numbers::e * detail::nn(n) / dd) + blockkt(n);
}

inline double known_px(std::size_t n, std::size_t d) {
    return (detail::nn(d) + 8.0) * std::log2(std::exp(4.0) * detail::nn(n)) + 6.0;
}

inline double halfspace(std::size_t n, std::size_t d) {
    const double dd = detail::nn(d);
    return (2.0 * dd + 1.0) * std::log2(detail::nn(n)) + dd * std::log2(48.0 * dd) + log2_pi2_over_8();
}

inline double rect(std::size_t n, std::size_t d) {
    return (2.0 * detail::nn(d) + 1.0) * std::log2(detail::nn(n) + 1.0) + log2_pi2_over_8();
}

inline double aux(std::size_t n, std::size_t d, double C = kDefaultC) {
    const double dd = detail::nn(d), n_ = detail::nn(n);
    return dd * std::log2(std::numbers::e * n_ / dd) + 16.0 * C * std::sqrt(n_ * dd) * std::log2(6.0 * n_ + 2.0);
}

inline double thm1(std::size_t n, std::size_t d, double C = kDefaultC) {
    const double dd = detail::nn(d), n_ = detail::nn(n), ln = std::log2(n_);
    return 125.0 * C * std::sqrt(dd * n_) * std::log2(2.0 * n_) + dd * ln * ln + 2.0;
}

/// High-probability form. Needs n >= 2 so that log2 n > 0.
inline double thm1_hp(std::size_t n, std::size_t d, double C, double delta) {
    if (n < 2) throw DomainError("thm1_hp needs n >= 2");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    const double dd = detail::nn(d), n_ = detail::nn(n), ln = std::log2(n_);
    const double tail = std::sqrt(2.0 * std::log2(2.0 * ln / delta));
    return 25.0 * C * std::sqrt(dd * n_) * std::log2(2.0 * n_) * (C * std::sqrt(dd) + tail) + dd * ln * ln + 2.0;
}

inline double thm2_lower(std::size_t n, std::size_t d) {
    const double dd = detail::nn(d), n_ = detail::nn(n);
    return dd + std::log2(n_ + 1.0) - detail::two_sqrt_e() * dd * dd * std::exp(-3.0 * n_ / (100.0 * dd)) -
           std::log2(std::numbers::pi * std::numbers::e);
}

inline double fano_floor(std::size_t n, std::size_t m) {
    const double mm = detail::nn(m), n_ = detail::nn(n);
    return mm + std::log2(n_ + 1.0) - std::log2(std::numbers::pi * std::numbers::e) -
           detail::two_sqrt_e() * mm * mm * std::exp(-3.0 * n_ / (100.0 * mm));
}

/// Error-probability bound for the midrange table estimator; exceeds 1 (is
/// vacuous) for small n.
inline double ghat_error(std::size_t n, std::size_t m) {
    const double mm = detail::nn(m), n_ = detail::nn(n);
    const double base = 2.0 / std::exp2(mm);
    return base + (1.0 - base) * detail::two_sqrt_e() * mm * std::exp(-3.0 * n_ / (100.0 * mm));
}

struct BoundReport {
    std::string name;
    std::size_t n = 0;
    std::size_t d = 0;
    double C = kDefaultC;
    double delta = 0.0;
    double bits = 0.0;
};

/// Every evaluator at (n, d) in a fixed order. finite_class uses |G| = 2^d and
/// fano_floor uses m = d.
inline std::vector<BoundReport> table(std::size_t n, std::size_t d, double C = kDefaultC, double delta = 0.1) {
    if (n == 0 || d == 0 || d > 62) throw DomainError("bounds table needs n >= 1 and 1 <= d <= 62");
    std::vector<BoundReport> out;
    auto add = [&](std::string name, double v) { out.push_back({std::move(name), n, d, C, delta, v}); };
    add("blockkt", blockkt(n));
    add("finite_class", finite_class(n, std::size_t{1} << d));
    add("noncausal", noncausal(n, d));
    add("known_px", known_px(n, d));
    add("halfspace", halfspace(n, d));
    add("rect", rect(n, d));
    add("aux", aux(n, d, C));
    add("thm1", thm1(n, d, C));
    if (n >= 2) add("thm1_hp", thm1_hp(n, d, C, delta));
    add("thm2_lower", thm2_lower(n, d));
    add("fano_floor", fano_floor(n, d));
    return out;
}

}  // namespace lsp::bounds
