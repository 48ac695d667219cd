#pragma once

// Shared generators and independent oracles for the test suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lsp/hypothesis.hpp"
#include "lsp/predictors.hpp"

namespace lsp::test {

inline double binom(unsigned n, unsigned k) {
    if (k > n) return 0.0;
    double r = 1.0;
    for (unsigned i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

/// (1/4^n) C(n,k) C(2n,n) / C(2n,2k), evaluated directly.
inline double kt_joint_oracle(unsigned n, unsigned k) {
    return binom(n, k) * binom(2 * n, n) / binom(2 * n, 2 * k) / std::pow(4.0, n);
}

/// 1 / ((n+1) C(n,k)).
inline double laplace_joint_oracle(unsigned n, unsigned k) { return 1.0 / ((n + 1.0) * binom(n, k)); }

inline double block_oracle(ThetaPrior p, unsigned n, unsigned k) {
    return p == ThetaPrior::Jeffreys ? kt_joint_oracle(n, k) : laplace_joint_oracle(n, k);
}

/// (1/N) sum_g prod_b closed_form(n_b, k_b) over the given labelers.
inline double mixture_joint_oracle(const std::vector<Labeler>& gs, ThetaPrior prior, const std::vector<Point>& x,
                                   const std::vector<Bit>& y) {
    double s = 0.0;
    for (const auto& g : gs) {
        unsigned n[2] = {0, 0}, k[2] = {0, 0};
        for (std::size_t i = 0; i < x.size(); ++i) {
            const Bit b = label(g, x[i]);
            ++n[b];
            k[b] += y[i];
        }
        s += block_oracle(prior, n[0], k[0]) * block_oracle(prior, n[1], k[1]);
    }
    return s / static_cast<double>(gs.size());
}

inline std::vector<Bit> bits_of(std::uint64_t code, std::size_t n) {
    std::vector<Bit> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<Bit>((code >> i) & 1u);
    return y;
}

// ---------------------------------------------------------------------------
// Generators

inline std::vector<Point> random_symbols(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    std::vector<Point> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back(Point::symbol(uniform_index(rng, m)));
    return x;
}

inline std::vector<Point> random_unit(std::mt19937_64& rng, std::size_t n) {
    std::vector<Point> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back(Point::scalar(uniform01(rng)));
    return x;
}

/// Values on a coarse grid so that duplicates are common.
inline std::vector<Point> random_unit_with_ties(std::mt19937_64& rng, std::size_t n) {
    std::vector<Point> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back(Point::scalar(static_cast<double>(uniform_index(rng, 9)) / 8.0));
    return x;
}

inline std::vector<Point> random_circle(std::mt19937_64& rng, std::size_t n) {
    std::vector<Point> x;
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = 2.0 * std::numbers::pi * uniform01(rng);
        x.push_back(Point{std::cos(phi), std::sin(phi)});
    }
    return x;
}

inline std::vector<Point> random_box(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::vector<Point> x;
    std::vector<double> c(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : c) v = uniform01(rng);
        x.emplace_back(std::span<const double>(c));
    }
    return x;
}

inline FiniteTable random_table(std::mt19937_64& rng, std::size_t m) {
    FiniteTable t;
    for (std::size_t l = 0; l < m; ++l) t.bits.push_back(static_cast<Bit>(rng() >> 63));
    return t;
}

inline std::vector<Labeler> random_tables(std::mt19937_64& rng, std::size_t count, std::size_t m) {
    std::vector<Labeler> gs;
    for (std::size_t i = 0; i < count; ++i) gs.emplace_back(random_table(rng, m));
    return gs;
}

inline std::vector<double> random_pmf(std::mt19937_64& rng, std::size_t m) {
    std::vector<double> p(m);
    double s = 0.0;
    for (auto& v : p) s += v = 0.05 + uniform01(rng);
    for (auto& v : p) v /= s;
    return p;
}

}  // namespace lsp::test
