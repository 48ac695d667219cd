#pragma once

// Labelers g, hypotheses f = (g, theta0, theta1), function classes, their
// projections onto finite point sets, and greedy coverings under the
// probability-of-disagreement metric.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <unordered_set>
#include <variant>
#include <vector>

#include "lsp/core.hpp"

namespace lsp {

// ---------------------------------------------------------------------------
// Labelers

/// g(x) = value for every x.
struct ConstantLabeler {
    Bit value = 0;

    friend bool operator==(const ConstantLabeler&, const ConstantLabeler&) = default;
};

/// Lookup table over the symbols 0..m-1 of a finite alphabet.
struct FiniteTable {
    std::vector<Bit> bits;

    std::size_t alphabet() const { return bits.size(); }

    friend bool operator==(const FiniteTable&, const FiniteTable&) = default;
};

/// Points x <= t fall in the left block. Polarity 1 labels the right block 1,
/// polarity 0 labels the left block 1.
struct Threshold {
    double t = 0.5;
    Bit polarity = 1;

    friend bool operator==(const Threshold&, const Threshold&) = default;
};

/// Homogeneous halfspace on the unit circle with normal (cos angle, sin angle).
/// A point on the boundary is labeled 1.
struct Halfspace2D {
    double angle = 0.0;

    friend bool operator==(const Halfspace2D&, const Halfspace2D&) = default;
};

/// Axis-aligned box prod_i [lower_i, upper_i] inside [0,1]^d.
struct Rectangle {
    std::size_t d = 1;
    std::array<double, Point::kMaxDim> lower{};
    std::array<double, Point::kMaxDim> upper{};

    Rectangle() = default;

    Rectangle(std::span<const double> a, std::span<const double> b) : d(a.size()) {
        if (a.size() != b.size() || a.empty() || a.size() > Point::kMaxDim)
            throw DomainError("rectangle corners must have equal dimension in 1..kMaxDim");
        for (std::size_t i = 0; i < d; ++i) {
            if (!(0.0 <= a[i] && a[i] <= b[i] && b[i] <= 1.0))
                throw DomainError("rectangle requires 0 <= a_i <= b_i <= 1");
            lower[i] = a[i];
            upper[i] = b[i];
        }
    }

    Rectangle(std::initializer_list<double> a, std::initializer_list<double> b)
        : Rectangle(std::span<const double>(a.begin(), a.size()),
                    std::span<const double>(b.begin(), b.size())) {}

    friend bool operator==(const Rectangle&, const Rectangle&) = default;
};

using Labeler = std::variant<ConstantLabeler, FiniteTable, Threshold, Halfspace2D, Rectangle>;

inline constexpr double kUnitCircleTolerance = 1e-9;

namespace detail {

inline void check_unit_interval(const Point& x) {
    if (x.dim() != 1) throw DomainError("threshold labelers take one-dimensional points");
    if (!(x[0] >= 0.0 && x[0] <= 1.0)) throw DomainError("threshold point outside [0,1]");
}

inline void check_unit_circle(const Point& x) {
    if (x.dim() != 2) throw DomainError("halfspace labelers take two-dimensional points");
    const double r = std::hypot(x[0], x[1]);
    if (!(std::abs(r - 1.0) <= 1e-6)) throw DomainError("halfspace point is not on the unit circle");
}

inline void check_unit_box(const Point& x, std::size_t d) {
    if (x.dim() != d) throw DomainError("point dimension does not match rectangle dimension");
    for (std::size_t i = 0; i < d; ++i)
        if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw DomainError("rectangle point outside [0,1]^d");
}

inline Bit threshold_bit(const Threshold& g, double v) {
    const Bit right = v > g.t ? 1 : 0;
    return g.polarity ? right : static_cast<Bit>(1 - right);
}

inline Bit halfspace_bit(double c, double s, const Point& x) {
    return c * x[0] + s * x[1] >= 0.0 ? 1 : 0;
}

inline Bit rectangle_bit(const Rectangle& g, const Point& x) {
    for (std::size_t i = 0; i < g.d; ++i)
        if (!(g.lower[i] <= x[i] && x[i] <= g.upper[i])) return 0;
    return 1;
}

}  // namespace detail

/// Evaluates g(x); throws DomainError when x is outside the labeler's domain.
inline Bit label(const Labeler& g, const Point& x) {
    struct Visitor {
        const Point& x;
        Bit operator()(const ConstantLabeler& c) const { return c.value; }
        Bit operator()(const FiniteTable& t) const { return t.bits[x.as_symbol(t.alphabet())]; }
        Bit operator()(const Threshold& t) const {
            detail::check_unit_interval(x);
            return detail::threshold_bit(t, x[0]);
        }
        Bit operator()(const Halfspace2D& h) const {
            detail::check_unit_circle(x);
            return detail::halfspace_bit(std::cos(h.angle), std::sin(h.angle), x);
        }
        Bit operator()(const Rectangle& r) const {
            detail::check_unit_box(x, r.d);
            return detail::rectangle_bit(r, x);
        }
    };
    return std::visit(Visitor{x}, g);
}

// ---------------------------------------------------------------------------
// Hypotheses

struct Hypothesis {
    Labeler labeler;
    double theta0 = 0.5;
    double theta1 = 0.5;

    double theta(Bit block) const { return block ? theta1 : theta0; }
};

inline void validate(const Hypothesis& h) {
    if (!(h.theta0 >= 0.0 && h.theta0 <= 1.0 && h.theta1 >= 0.0 && h.theta1 <= 1.0))
        throw DomainError("hypothesis parameters must lie in [0,1]");
}

/// Nature's conditional law of Y given X = x: (1 - theta_g(x), theta_g(x)).
inline Pmf2 cond_pmf(const Hypothesis& h, const Point& x) {
    return Pmf2::from_p1(h.theta(label(h.labeler, x)));
}

// ---------------------------------------------------------------------------
// Function classes

struct FiniteClass {
    std::vector<Labeler> members;
};
struct ThresholdClass {};
struct Halfspace2DClass {};
struct RectangleClass {
    std::size_t d = 1;
};

class FunctionClass {
public:
    using Kind = std::variant<FiniteClass, ThresholdClass, Halfspace2DClass, RectangleClass>;

    /// A finite class. `vc_dim` defaults to ceil(log2 |G|), at least 1.
    static FunctionClass finite(std::vector<Labeler> members, std::optional<std::size_t> vc_dim = {}) {
        if (members.empty()) throw DomainError("finite function class must be non-empty");
        std::size_t d = vc_dim.value_or(
            static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(members.size())))));
        return FunctionClass(FiniteClass{std::move(members)}, std::max<std::size_t>(d, 1));
    }

    /// All 2^m binary tables over an m-letter alphabet, in binary-counting
    /// order (symbol l holds bit l of the member index).
    static FunctionClass full_tables(std::size_t m) {
        if (m == 0 || m > 20) throw DomainError("full table class needs 1 <= m <= 20");
        std::vector<Labeler> members;
        members.reserve(std::size_t{1} << m);
        for (std::size_t code = 0; code < (std::size_t{1} << m); ++code) {
            FiniteTable t;
            t.bits.resize(m);
            for (std::size_t l = 0; l < m; ++l) t.bits[l] = static_cast<Bit>((code >> l) & 1u);
            members.emplace_back(std::move(t));
        }
        return FunctionClass(FiniteClass{std::move(members)}, m);
    }

    /// {g = 0, g = 1}.
    static FunctionClass constants() {
        return FunctionClass(FiniteClass{{ConstantLabeler{0}, ConstantLabeler{1}}}, 1);
    }

    static FunctionClass thresholds() { return FunctionClass(ThresholdClass{}, 1); }
    static FunctionClass halfspaces2d() { return FunctionClass(Halfspace2DClass{}, 2); }
    static FunctionClass rectangles(std::size_t d) {
        if (d == 0 || d > Point::kMaxDim) throw DomainError("rectangle dimension out of range");
        return FunctionClass(RectangleClass{d}, 2 * d);
    }

    const Kind& kind() const { return kind_; }
    std::size_t vc_dim() const { return vc_dim_; }

    bool is_finite() const { return std::holds_alternative<FiniteClass>(kind_); }
    const std::vector<Labeler>& members() const {
        if (!is_finite()) throw DomainError("class has no finite member list");
        return std::get<FiniteClass>(kind_).members;
    }

private:
    FunctionClass(Kind k, std::size_t d) : kind_(std::move(k)), vc_dim_(d) {}

    Kind kind_;
    std::size_t vc_dim_;
};

// ---------------------------------------------------------------------------
// Projection onto a point set

struct LabelingPattern {
    BitVector bits;
    Labeler representative;
};

inline BitVector evaluate_bits(const Labeler& g, std::span<const Point> points) {
    BitVector bits(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        if (label(g, points[i])) bits.set(i);
    return bits;
}

namespace detail {

class PatternSet {
public:
    void offer(BitVector bits, Labeler rep) {
        if (seen_.insert(bits).second) out_.push_back({std::move(bits), std::move(rep)});
    }
    std::vector<LabelingPattern> take() { return std::move(out_); }

private:
    std::unordered_set<BitVector, BitVectorHash> seen_;
    std::vector<LabelingPattern> out_;
};

/// Interior parameter candidates along one axis of [0,1]: one value below the
/// smallest coordinate, midpoints between consecutive distinct coordinates,
/// and one above the largest.
inline std::vector<double> gap_midpoints(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<double> out;
    out.reserve(v.size() + 1);
    out.push_back(v.front() / 2.0);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) out.push_back((v[i] + v[i + 1]) / 2.0);
    out.push_back((v.back() + 1.0) / 2.0);
    return out;
}

inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a < 0.0) a += two_pi;
    return a;
}

/// Sorted distinct critical angles {angle(x) +- pi/2} of a circle point set.
inline std::vector<double> critical_angles(std::span<const Point> points) {
    std::vector<double> crit;
    crit.reserve(2 * points.size());
    for (const auto& x : points) {
        check_unit_circle(x);
        const double a = std::atan2(x[1], x[0]);
        crit.push_back(wrap_angle(a + std::numbers::pi / 2.0));
        crit.push_back(wrap_angle(a - std::numbers::pi / 2.0));
    }
    std::sort(crit.begin(), crit.end());
    crit.erase(std::unique(crit.begin(), crit.end()), crit.end());
    return crit;
}

inline std::vector<LabelingPattern> project_finite(const FiniteClass& c, std::span<const Point> points) {
    PatternSet set;
    for (const auto& g : c.members) set.offer(evaluate_bits(g, points), g);
    return set.take();
}

inline std::vector<LabelingPattern> project_thresholds(std::span<const Point> points) {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& x : points) {
        check_unit_interval(x);
        v.push_back(x[0]);
    }
    const auto cands = gap_midpoints(std::move(v));
    PatternSet set;
    for (Bit pol : {Bit{1}, Bit{0}})
        for (double t : cands) {
            Threshold g{t, pol};
            set.offer(evaluate_bits(g, points), g);
        }
    return set.take();
}

inline std::vector<LabelingPattern> project_halfspaces(std::span<const Point> points) {
    const auto crit = critical_angles(points);
    PatternSet set;
    for (std::size_t i = 0; i < crit.size(); ++i) {
        const double next = i + 1 < crit.size() ? crit[i + 1] : crit[0] + 2.0 * std::numbers::pi;
        Halfspace2D g{wrap_angle((crit[i] + next) / 2.0)};
        set.offer(evaluate_bits(g, points), g);
    }
    return set.take();
}

/// d = 1 fast path: interval (i, j) over the distinct-coordinate gaps covers
/// exactly the distinct values with rank in [i, j). Emits patterns in the same
/// order (and with the same representatives) as the general enumeration.
inline std::vector<LabelingPattern> project_intervals(std::span<const Point> points) {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& x : points) {
        check_unit_box(x, 1);
        v.push_back(x[0]);
    }
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const auto cands = gap_midpoints(v);

    // Points grouped by the rank of their coordinate among distinct values.
    std::vector<std::vector<std::size_t>> by_rank(sorted.size());
    for (std::size_t p = 0; p < v.size(); ++p) {
        const auto r = std::lower_bound(sorted.begin(), sorted.end(), v[p]) - sorted.begin();
        by_rank[static_cast<std::size_t>(r)].push_back(p);
    }

    std::vector<LabelingPattern> out;
    const std::size_t k = cands.size();
    out.reserve(1 + k * (k - 1) / 2);
    out.push_back({BitVector(points.size()), Rectangle({cands[0]}, {cands[0]})});
    for (std::size_t i = 0; i < k; ++i) {
        BitVector bits(points.size());
        for (std::size_t j = i + 1; j < k; ++j) {
            for (auto p : by_rank[j - 1]) bits.set(p);
            out.push_back({bits, Rectangle({cands[i]}, {cands[j]})});
        }
    }
    return out;
}

inline std::vector<LabelingPattern> project_rectangles(std::size_t d, std::span<const Point> points) {
    // Boundary coordinates make the outermost candidates coincide with a
    // point, which breaks the fast path's empty-(i, i) assumption.
    const bool boundary = std::any_of(points.begin(), points.end(), [](const Point& x) {
        return x.dim() == 1 && (x[0] == 0.0 || x[0] == 1.0);
    });
    if (d == 1 && !boundary) return project_intervals(points);
    std::vector<std::vector<double>> cands(d);
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> v;
        for (const auto& x : points) {
            check_unit_box(x, d);
            v.push_back(x[i]);
        }
        cands[i] = gap_midpoints(std::move(v));
    }
    // Per-axis (lower, upper) index pairs with lower <= upper.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pairs(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t a = 0; a < cands[i].size(); ++a)
            for (std::size_t b = a; b < cands[i].size(); ++b) pairs[i].emplace_back(a, b);

    PatternSet set;
    std::vector<std::size_t> idx(d, 0);
    std::array<double, Point::kMaxDim> lo{}, hi{};
    for (;;) {
        for (std::size_t i = 0; i < d; ++i) {
            lo[i] = cands[i][pairs[i][idx[i]].first];
            hi[i] = cands[i][pairs[i][idx[i]].second];
        }
        Rectangle g(std::span<const double>(lo.data(), d), std::span<const double>(hi.data(), d));
        BitVector bits(points.size());
        for (std::size_t p = 0; p < points.size(); ++p)
            if (rectangle_bit(g, points[p])) bits.set(p);
        set.offer(std::move(bits), g);

        // Odometer, last axis fastest.
        std::size_t axis = d;
        while (axis > 0) {
            --axis;
            if (++idx[axis] < pairs[axis].size()) break;
            idx[axis] = 0;
            if (axis == 0) return set.take();
        }
    }
}

}  // namespace detail

/// Distinct labelings the class realizes on `points`, each with a labeler
/// realizing it. Output order is deterministic.
inline std::vector<LabelingPattern> project(const FunctionClass& cls, std::span<const Point> points) {
    if (points.empty()) throw DomainError("project requires a non-empty point list");
    struct Visitor {
        std::span<const Point> pts;
        std::vector<LabelingPattern> operator()(const FiniteClass& c) const { return detail::project_finite(c, pts); }
        std::vector<LabelingPattern> operator()(const ThresholdClass&) const { return detail::project_thresholds(pts); }
        std::vector<LabelingPattern> operator()(const Halfspace2DClass&) const { return detail::project_halfspaces(pts); }
        std::vector<LabelingPattern> operator()(const RectangleClass& r) const {
            return detail::project_rectangles(r.d, pts);
        }
    };
    return std::visit(Visitor{points}, cls.kind());
}

/// (e n / d)^d.
inline double sauer_shelah_bound(std::size_t d, std::size_t n) {
    if (d == 0 || n < d) throw DomainError("Sauer-Shelah bound needs n >= d >= 1");
    const double dd = static_cast<double>(d);
    return std::pow(std::numbers::e * static_cast<double>(n) / dd, dd);
}

// ---------------------------------------------------------------------------
// Coverings

/// P_X(g(X) != h(X)) for labelers over a finite alphabet with pmf px.
inline double disagreement(const Labeler& g, const Labeler& h, std::span<const double> px) {
    double s = 0.0;
    for (std::size_t l = 0; l < px.size(); ++l) {
        const Point x = Point::symbol(l);
        if (label(g, x) != label(h, x)) s += px[l];
    }
    return s;
}

/// Greedy set cover: repeatedly keeps the member whose epsilon-ball holds the
/// most uncovered members (lowest index on ties) until every member is within
/// epsilon of a kept one.
inline std::vector<Labeler> cover(const FunctionClass& cls, double epsilon, std::span<const double> px) {
    if (!cls.is_finite()) throw DomainError("cover is only defined for finite classes");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("cover requires 0 < epsilon <= 1");
    if (px.empty()) throw DomainError("cover requires a non-empty pmf");
    const auto& g = cls.members();
    const std::size_t n = g.size();
    const std::size_t m = px.size();

    std::vector<std::vector<Bit>> table(n, std::vector<Bit>(m));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < m; ++l) table[i][l] = label(g[i], Point::symbol(l));

    constexpr double kSlack = 1e-12;
    std::vector<std::vector<std::size_t>> ball(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double dist = 0.0;
            for (std::size_t l = 0; l < m; ++l)
                if (table[i][l] != table[j][l]) dist += px[l];
            if (dist <= epsilon + kSlack) ball[i].push_back(j);
        }

    std::vector<bool> covered(n, false);
    std::size_t remaining = n;
    std::vector<Labeler> out;
    while (remaining > 0) {
        std::size_t best = 0, best_gain = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t gain = 0;
            for (auto j : ball[i]) gain += covered[j] ? 0 : 1;
            if (gain > best_gain) {
                best_gain = gain;
                best = i;
            }
        }
        for (auto j : ball[best])
            if (!covered[j]) {
                covered[j] = true;
                --remaining;
            }
        out.push_back(g[best]);
    }
    return out;
}

/// (e^4 / epsilon)^d, the existence bound on the covering number reported
/// next to the constructed cover size.
inline double covering_number_bound(std::size_t d, double epsilon) {
    return std::pow(std::pow(std::numbers::e, 4) / epsilon, static_cast<double>(d));
}

}  // namespace lsp
