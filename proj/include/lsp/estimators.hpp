#pragma once

// Add-constant estimators for a Bernoulli parameter under a Beta(a, a) prior:
// the Krichevsky-Trofimov rule (a = 1/2) and the Laplace rule (a = 1), in
// sequential and closed (joint) form.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "lsp/core.hpp"

namespace lsp {

enum class ThetaPrior : std::uint8_t {
    Jeffreys,  ///< Beta(1/2, 1/2): the KT rule
    Uniform,   ///< Beta(1, 1): the Laplace rule
};

inline constexpr double pseudo_count(ThetaPrior p) { return p == ThetaPrior::Jeffreys ? 0.5 : 1.0; }

inline std::string to_string(ThetaPrior p) { return p == ThetaPrior::Jeffreys ? "jeffreys" : "uniform"; }

inline ThetaPrior theta_prior_from_string(const std::string& s) {
    if (s == "jeffreys" || s == "kt") return ThetaPrior::Jeffreys;
    if (s == "uniform" || s == "laplace") return ThetaPrior::Uniform;
    throw DomainError("unknown theta prior '" + s + "'");
}

namespace detail {
inline void check_counts(std::uint64_t n, std::uint64_t k) {
    if (k > n) throw DomainError("ones-count exceeds sequence length");
}
}  // namespace detail

/// One-step predictive law after n observations with k ones.
inline Pmf2 add_constant_step(ThetaPrior prior, std::uint64_t n, std::uint64_t k) {
    detail::check_counts(n, k);
    const double a = pseudo_count(prior);
    return Pmf2::from_p1((static_cast<double>(k) + a) / (static_cast<double>(n) + 2.0 * a));
}

inline Pmf2 kt_step(std::uint64_t n, std::uint64_t k) { return add_constant_step(ThetaPrior::Jeffreys, n, k); }
inline Pmf2 laplace_step(std::uint64_t n, std::uint64_t k) { return add_constant_step(ThetaPrior::Uniform, n, k); }

/// ln of the Beta(a,a)-mixture probability of any particular length-n
/// sequence with k ones: ln B(k + a, n - k + a) - ln B(a, a).
inline double ln_block_joint(ThetaPrior prior, std::uint64_t n, std::uint64_t k) {
    detail::check_counts(n, k);
    const double a = pseudo_count(prior);
    const double kk = static_cast<double>(k), nn = static_cast<double>(n);
    const double ln_beta = std::lgamma(kk + a) + std::lgamma(nn - kk + a) - std::lgamma(nn + 2.0 * a);
    const double ln_beta0 = 2.0 * std::lgamma(a) - std::lgamma(2.0 * a);
    return ln_beta - ln_beta0;
}

inline double kt_joint(std::uint64_t n, std::uint64_t k) { return std::exp(ln_block_joint(ThetaPrior::Jeffreys, n, k)); }
inline double laplace_joint(std::uint64_t n, std::uint64_t k) { return std::exp(ln_block_joint(ThetaPrior::Uniform, n, k)); }

}  // namespace lsp
