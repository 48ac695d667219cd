#pragma once

// Basic value types shared by every module: labels, points, two-point pmfs,
// packed bit vectors, the error hierarchy and a portable RNG helper.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsp {

using Bit = std::uint8_t;

inline constexpr double kLn2 = std::numbers::ln2;

/// Converts a natural-log quantity into bits.
inline constexpr double nats_to_bits(double nats) { return nats / kLn2; }

// ---------------------------------------------------------------------------
// Errors

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChecksumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Points

/// A side-information value. Symbols of a finite alphabet are stored as a
/// one-coordinate point holding the (integral) symbol index.
class Point {
public:
    static constexpr std::size_t kMaxDim = 8;

    Point() = default;

    Point(std::initializer_list<double> coords) {
        assign(std::span<const double>(coords.begin(), coords.size()));
    }

    explicit Point(std::span<const double> coords) { assign(coords); }

    static Point symbol(std::size_t index) { return Point{static_cast<double>(index)}; }
    static Point scalar(double v) { return Point{v}; }

    std::size_t dim() const { return dim_; }
    double operator[](std::size_t i) const { return c_[i]; }
    std::span<const double> coords() const { return {c_.data(), dim_}; }

    /// Symbol index when this point is a symbol of an alphabet of `alphabet`
    /// letters; throws DomainError otherwise.
    std::size_t as_symbol(std::size_t alphabet) const {
        if (dim_ != 1) throw DomainError("symbol point must have one coordinate");
        const double v = c_[0];
        if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(alphabet))
            throw DomainError("symbol index out of range for alphabet of size " +
                              std::to_string(alphabet));
        return static_cast<std::size_t>(v);
    }

    friend bool operator==(const Point& a, const Point& b) {
        return a.dim_ == b.dim_ && std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
    }

private:
    void assign(std::span<const double> coords) {
        if (coords.size() > kMaxDim) throw DomainError("point dimension exceeds Point::kMaxDim");
        std::copy(coords.begin(), coords.end(), c_.begin());
        dim_ = static_cast<std::uint8_t>(coords.size());
    }

    std::array<double, kMaxDim> c_{};
    std::uint8_t dim_ = 0;
};

// ---------------------------------------------------------------------------
// Two-point pmf

struct Pmf2 {
    double p0 = 0.5;
    double p1 = 0.5;

    double operator[](Bit y) const { return y ? p1 : p0; }

    static Pmf2 from_p1(double p1) { return {1.0 - p1, p1}; }
};

// ---------------------------------------------------------------------------
// Packed bit vector (labeling patterns, tables)

class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t n) : words_((n + 63) / 64, 0), size_(n) {}

    std::size_t size() const { return size_; }

    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }

    void set(std::size_t i, bool v = true) {
        const std::uint64_t m = std::uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= m;
        else
            words_[i >> 6] &= ~m;
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    std::span<const std::uint64_t> words() const { return words_; }

    std::string to_string() const {
        std::string s(size_, '0');
        for (std::size_t i = 0; i < size_; ++i)
            if (get(i)) s[i] = '1';
        return s;
    }

    friend bool operator==(const BitVector&, const BitVector&) = default;

private:
    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

struct BitVectorHash {
    std::size_t operator()(const BitVector& b) const noexcept {
        std::uint64_t h = 0x9E3779B97F4A7C15ull ^ b.size();
        for (auto w : b.words()) {
            h ^= w + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
            h *= 0xBF58476D1CE4E5B9ull;
        }
        return static_cast<std::size_t>(h ^ (h >> 31));
    }
};

// ---------------------------------------------------------------------------
// RNG helpers. Uniform doubles are built from raw 64-bit draws so that a seed
// gives the same stream on every standard library.

template <class Rng>
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Rng>
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::uint64_t(-bound) % bound;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= limit) return static_cast<std::size_t>(r % bound);
    }
}

template <class Rng>
inline Bit bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p ? Bit{1} : Bit{0};
}

/// SplitMix64 step, used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// ln(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline double log_sum_exp(std::span<const double> xs) {
    double m = -INFINITY;
    for (double x : xs) m = std::max(m, x);
    if (m == -INFINITY) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace lsp
