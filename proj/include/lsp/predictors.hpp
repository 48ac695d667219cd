#pragma once

// Sequential probability assignments behind a predict-then-update contract:
// block-wise add-constant rules, finite Bayesian mixtures over labelers (with
// the noncausal-projection and covering constructions), exact-cell and
// sampled parameter mixtures for halfspaces and rectangles, and the doubling
// epoch mixture.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "lsp/core.hpp"
#include "lsp/estimators.hpp"
#include "lsp/hypothesis.hpp"

namespace lsp {

template <class P>
concept SequentialPredictor = requires(P p, const Point& x, Bit y) {
    { p.predict(x) } -> std::same_as<Pmf2>;
    p.update(x, y);
};

struct BlockCounts {
    std::uint64_t n0 = 0, k0 = 0, n1 = 0, k1 = 0;

    friend bool operator==(const BlockCounts&, const BlockCounts&) = default;
};

// ---------------------------------------------------------------------------
// Block-wise add-constant rule for a fixed labeler g*.

class BlockwiseEstimator {
public:
    explicit BlockwiseEstimator(Labeler g_star = ConstantLabeler{0}, ThetaPrior prior = ThetaPrior::Jeffreys)
        : g_(std::move(g_star)), prior_(prior) {}

    Pmf2 predict(const Point& x) const {
        return label(g_, x) ? add_constant_step(prior_, c_.n1, c_.k1) : add_constant_step(prior_, c_.n0, c_.k0);
    }

    void update(const Point& x, Bit y) {
        if (label(g_, x)) {
            ++c_.n1;
            c_.k1 += y;
        } else {
            ++c_.n0;
            c_.k0 += y;
        }
    }

    const BlockCounts& counts() const { return c_; }
    const Labeler& labeler() const { return g_; }
    ThetaPrior prior() const { return prior_; }

private:
    Labeler g_;
    ThetaPrior prior_;
    BlockCounts c_;
};

/// Plain KT assignment (no side information).
inline BlockwiseEstimator kt_predictor() { return BlockwiseEstimator(ConstantLabeler{0}, ThetaPrior::Jeffreys); }
inline BlockwiseEstimator laplace_predictor() { return BlockwiseEstimator(ConstantLabeler{0}, ThetaPrior::Uniform); }

// ---------------------------------------------------------------------------
// Homogeneous, structure-of-arrays evaluation of many labelers at one point.

class LabelBank {
public:
    LabelBank() = default;

    explicit LabelBank(std::span<const Labeler> gs) : size_(gs.size()) {
        if (gs.empty()) return;
        const auto idx = gs.front().index();
        bool same = std::all_of(gs.begin(), gs.end(), [&](const Labeler& g) { return g.index() == idx; });
        if (same && std::holds_alternative<FiniteTable>(gs.front())) {
            alphabet_ = std::get<FiniteTable>(gs.front()).alphabet();
            same = std::all_of(gs.begin(), gs.end(),
                               [&](const Labeler& g) { return std::get<FiniteTable>(g).alphabet() == alphabet_; });
        }
        if (same && std::holds_alternative<Rectangle>(gs.front())) {
            d_ = std::get<Rectangle>(gs.front()).d;
            same = std::all_of(gs.begin(), gs.end(), [&](const Labeler& g) { return std::get<Rectangle>(g).d == d_; });
        }
        if (!same) {
            kind_ = Kind::Mixed;
            mixed_.assign(gs.begin(), gs.end());
            return;
        }
        switch (idx) {
            case 0:
                kind_ = Kind::Constant;
                for (const auto& g : gs) bits_.push_back(std::get<ConstantLabeler>(g).value);
                break;
            case 1:
                kind_ = Kind::Table;
                bits_.reserve(size_ * alphabet_);
                for (const auto& g : gs) {
                    const auto& t = std::get<FiniteTable>(g).bits;
                    bits_.insert(bits_.end(), t.begin(), t.end());
                }
                break;
            case 2:
                kind_ = Kind::Threshold;
                for (const auto& g : gs) {
                    a_.push_back(std::get<Threshold>(g).t);
                    bits_.push_back(std::get<Threshold>(g).polarity);
                }
                break;
            case 3:
                kind_ = Kind::Halfspace;
                for (const auto& g : gs) {
                    a_.push_back(std::cos(std::get<Halfspace2D>(g).angle));
                    b_.push_back(std::sin(std::get<Halfspace2D>(g).angle));
                }
                break;
            default:
                kind_ = Kind::Rectangle;
                for (const auto& g : gs) {
                    const auto& r = std::get<Rectangle>(g);
                    a_.insert(a_.end(), r.lower.begin(), r.lower.begin() + static_cast<std::ptrdiff_t>(d_));
                    b_.insert(b_.end(), r.upper.begin(), r.upper.begin() + static_cast<std::ptrdiff_t>(d_));
                }
                break;
        }
    }

    std::size_t size() const { return size_; }

    void label_all(const Point& x, std::span<Bit> out) const {
        switch (kind_) {
            case Kind::Constant:
                std::copy(bits_.begin(), bits_.end(), out.begin());
                break;
            case Kind::Table: {
                const std::size_t l = x.as_symbol(alphabet_);
                for (std::size_t c = 0; c < size_; ++c) out[c] = bits_[c * alphabet_ + l];
                break;
            }
            case Kind::Threshold:
                detail::check_unit_interval(x);
                for (std::size_t c = 0; c < size_; ++c) out[c] = detail::threshold_bit(Threshold{a_[c], bits_[c]}, x[0]);
                break;
            case Kind::Halfspace:
                detail::check_unit_circle(x);
                for (std::size_t c = 0; c < size_; ++c) out[c] = detail::halfspace_bit(a_[c], b_[c], x);
                break;
            case Kind::Rectangle:
                detail::check_unit_box(x, d_);
                if (d_ == 1) {
                    const double v = x[0];
                    for (std::size_t c = 0; c < size_; ++c) out[c] = static_cast<Bit>((a_[c] <= v) & (v <= b_[c]));
                } else {
                    for (std::size_t c = 0; c < size_; ++c) {
                        Bit in = 1;
                        for (std::size_t i = 0; i < d_; ++i) {
                            const double v = x[i];
                            in &= static_cast<Bit>((a_[c * d_ + i] <= v) & (v <= b_[c * d_ + i]));
                        }
                        out[c] = in;
                    }
                }
                break;
            case Kind::Mixed:
                for (std::size_t c = 0; c < size_; ++c) out[c] = label(mixed_[c], x);
                break;
        }
    }

private:
    enum class Kind { Constant, Table, Threshold, Halfspace, Rectangle, Mixed };
    Kind kind_ = Kind::Mixed;
    std::size_t size_ = 0;
    std::size_t alphabet_ = 0;
    std::size_t d_ = 0;
    std::vector<double> a_, b_;
    std::vector<Bit> bits_;
    std::vector<Labeler> mixed_;
};

// ---------------------------------------------------------------------------
// Finite mixture over labelers, theta0/theta1 integrated against a Beta prior.
//
// Each component keeps its block counts. Its log weight ln(1/N) + ln q_g(y^t |
// x^t) is a closed form in those counts, read from lgamma tables. Predictions
// use normalized posterior weights held in linear scale and updated by the
// realized step probabilities; every kResyncInterval updates they are
// recomputed from the log weights, and components below e^-550 of the total
// are set to zero until the next refresh.

class Mixture {
public:
    static constexpr unsigned kResyncInterval = 16;
    static constexpr double kPosteriorFloor = -550.0;

    Mixture(std::vector<Labeler> components, ThetaPrior prior)
        : labelers_(std::move(components)), prior_(prior), a_(pseudo_count(prior)) {
        if (labelers_.empty()) throw DomainError("mixture requires at least one component");
        bank_ = LabelBank(labelers_);
        const std::size_t n = labelers_.size();
        n1_.assign(n, 0.0);
        k1_.assign(n, 0.0);
        post_.assign(n, n == 1 ? 1.0 : 1.0 / static_cast<double>(n));
        labels_.assign(n, 0);
        p1_.assign(n, 0.0);
        ln_n_ = std::log(static_cast<double>(n));
        ln_beta0_ = 2.0 * std::lgamma(a_) - std::lgamma(2.0 * a_);
        grow_tables();
    }

    Pmf2 predict(const Point& x) {
        prepare(x);
        return Pmf2::from_p1(mix_p1_);
    }

    void update(const Point& x, Bit y) {
        prepare(x);
        const double pred_y = y ? mix_p1_ : 1.0 - mix_p1_;
        const std::size_t n = labelers_.size();
        const double yf = y;
        if (n > 1) {
            // py / pred_y with py = p1 or 1 - p1.
            const double inv = 1.0 / pred_y;
            const double s = (2.0 * yf - 1.0) * inv, c0 = (1.0 - yf) * inv;
            for (std::size_t c = 0; c < n; ++c) post_[c] *= c0 + s * p1_[c];
        }
        for (std::size_t c = 0; c < n; ++c) {
            const double g = labels_[c];
            n1_[c] += g;
            k1_[c] += g * yf;
        }
        ++t_;
        ones_ += y;
        lnz_ += std::log(pred_y);
        grow_tables();
        cached_ = false;
        if (!std::isfinite(lnz_)) throw DomainError("mixture log normalizer became non-finite");
        if (++since_sync_ == kResyncInterval) resync();
    }

    std::size_t size() const { return labelers_.size(); }
    ThetaPrior prior() const { return prior_; }
    std::uint64_t observations() const { return t_; }
    const Labeler& labeler(std::size_t i) const { return labelers_[i]; }

    BlockCounts counts(std::size_t i) const {
        const auto n1 = static_cast<std::uint64_t>(n1_[i]), k1 = static_cast<std::uint64_t>(k1_[i]);
        return {t_ - n1, ones_ - k1, n1, k1};
    }

    /// ln(1/N) + ln of the component's marginal probability of the history.
    double log_weight(std::size_t i) const {
        const auto c = counts(i);
        return -ln_n_ + block_joint(c.n0, c.k0) + block_joint(c.n1, c.k1);
    }

    /// ln of the mixture's joint probability of the history.
    double log_normalizer() const {
        std::vector<double> lw(size());
        for (std::size_t i = 0; i < lw.size(); ++i) lw[i] = log_weight(i);
        return log_sum_exp(lw);
    }

    /// Running sum of ln q(y_t | ...) over realized outcomes.
    double running_log_prob() const { return lnz_; }

private:
    double block_joint(std::uint64_t n, std::uint64_t k) const {
        return lg_a_[k] + lg_a_[n - k] - lg_2a_[n] - ln_beta0_;
    }

    void grow_tables() {
        while (lg_a_.size() <= t_) {
            const double j = static_cast<double>(lg_a_.size());
            lg_a_.push_back(std::lgamma(j + a_));
            lg_2a_.push_back(std::lgamma(j + 2.0 * a_));
        }
    }

    void prepare(const Point& x) {
        if (cached_ && cached_x_ == x) return;
        bank_.label_all(x, labels_);
        const std::size_t n = labelers_.size();
        const double t = static_cast<double>(t_), ones = static_cast<double>(ones_), a = a_, a2 = 2.0 * a_;
        double s = 0.0, s1 = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            const bool g = labels_[c];
            const double nb = g ? n1_[c] : t - n1_[c];
            const double kb = g ? k1_[c] : ones - k1_[c];
            const double p1 = (kb + a) / (nb + a2);
            p1_[c] = p1;
            s += post_[c];
            s1 += post_[c] * p1;
        }
        mix_p1_ = s1 / s;
        cached_x_ = x;
        cached_ = true;
    }

    void resync() {
        since_sync_ = 0;
        const std::size_t n = labelers_.size();
        std::vector<double> lw(n);
        for (std::size_t c = 0; c < n; ++c) lw[c] = log_weight(c);
        const double lz = log_sum_exp(lw);
        for (std::size_t c = 0; c < n; ++c) {
            const double r = lw[c] - lz;
            post_[c] = r < kPosteriorFloor ? 0.0 : std::exp(r);
        }
        lnz_ = lz;
    }

    std::vector<Labeler> labelers_;
    LabelBank bank_;
    ThetaPrior prior_;
    double a_;
    std::vector<double> n1_, k1_;  // integral counts held as doubles
    std::uint64_t t_ = 0, ones_ = 0;
    std::vector<double> post_;
    double lnz_ = 0.0;
    double ln_n_ = 0.0, ln_beta0_ = 0.0;
    std::vector<double> lg_a_, lg_2a_;  // lgamma(j + a), lgamma(j + 2a)
    std::vector<Bit> labels_;
    std::vector<double> p1_;
    Point cached_x_;
    bool cached_ = false;
    double mix_p1_ = 0.5;
    unsigned since_sync_ = 0;
};

/// Uniform mixture over every member of a finite class.
inline Mixture finite_mixture(const FunctionClass& cls, ThetaPrior prior = ThetaPrior::Jeffreys) {
    return Mixture(cls.members(), prior);
}

/// Uniform mixture over one representative per labeling of the full
/// side-information sequence.
inline Mixture noncausal_mixture(const FunctionClass& cls, std::span<const Point> x_all,
                                 ThetaPrior prior = ThetaPrior::Jeffreys) {
    auto patterns = project(cls, x_all);
    std::vector<Labeler> reps;
    reps.reserve(patterns.size());
    for (auto& p : patterns) reps.push_back(std::move(p.representative));
    return Mixture(std::move(reps), prior);
}

/// Uniform mixture over a greedy 1/n-cover of a finite class under a known
/// P_X.
inline Mixture covering_mixture(const FunctionClass& cls, std::span<const double> px, std::size_t horizon,
                                ThetaPrior prior = ThetaPrior::Uniform) {
    if (horizon == 0) throw DomainError("covering mixture needs a positive horizon");
    return Mixture(cover(cls, 1.0 / static_cast<double>(horizon), px), prior);
}

// ---------------------------------------------------------------------------
// Parameter mixtures for halfspaces (uniform direction) and rectangles
// (each (a_i, b_i) uniform on the triangle a_i <= b_i).

/// Frozen Monte-Carlo approximation: `samples` parameter draws fixed once
/// from `seed`, then mixed uniformly like a finite class.
inline Mixture sampled_param_mixture(const FunctionClass& cls, std::size_t samples, std::uint64_t seed,
                                     ThetaPrior prior = ThetaPrior::Jeffreys) {
    if (samples == 0) throw DomainError("sampled parameter mixture needs at least one sample");
    std::mt19937_64 rng(seed);
    std::vector<Labeler> gs;
    gs.reserve(samples);
    if (std::holds_alternative<Halfspace2DClass>(cls.kind())) {
        for (std::size_t s = 0; s < samples; ++s) gs.emplace_back(Halfspace2D{2.0 * std::numbers::pi * uniform01(rng)});
    } else if (const auto* rc = std::get_if<RectangleClass>(&cls.kind())) {
        std::array<double, Point::kMaxDim> lo{}, hi{};
        for (std::size_t s = 0; s < samples; ++s) {
            for (std::size_t i = 0; i < rc->d; ++i) {
                const double u = uniform01(rng), v = uniform01(rng);
                lo[i] = std::min(u, v);
                hi[i] = std::max(u, v);
            }
            gs.emplace_back(Rectangle(std::span<const double>(lo.data(), rc->d), std::span<const double>(hi.data(), rc->d)));
        }
    } else {
        throw DomainError("parameter mixtures are defined for halfspaces and rectangles only");
    }
    return Mixture(std::move(gs), prior);
}

/// Exact parameter mixture: the parameter space is cut into cells on which
/// every observed point keeps its label, and the mixture integral becomes a
/// cell-probability-weighted sum. Recomputed from the full history each step.
class ExactCellMixture {
public:
    static constexpr std::size_t kDefaultMaxCells = 2'000'000;

    explicit ExactCellMixture(FunctionClass cls, ThetaPrior prior = ThetaPrior::Jeffreys,
                              std::size_t max_cells = kDefaultMaxCells)
        : cls_(std::move(cls)), prior_(prior), max_cells_(max_cells) {
        if (!std::holds_alternative<Halfspace2DClass>(cls_.kind()) && !std::holds_alternative<RectangleClass>(cls_.kind()))
            throw DomainError("exact cells are available for halfspaces2d and rectangles only");
    }

    Pmf2 predict(const Point& x) {
        std::vector<Point> pts = xs_;
        pts.push_back(x);
        const auto cells = enumerate_cells(pts);
        const double a = pseudo_count(prior_);
        std::vector<double> lw, lw1;
        lw.reserve(cells.size());
        lw1.reserve(cells.size());
        for (const auto& cell : cells) {
            BlockCounts c;
            for (std::size_t i = 0; i < xs_.size(); ++i) {
                if (label(cell.rep, xs_[i])) {
                    ++c.n1;
                    c.k1 += ys_[i];
                } else {
                    ++c.n0;
                    c.k0 += ys_[i];
                }
            }
            const double lq = ln_block_joint(prior_, c.n0, c.k0) + ln_block_joint(prior_, c.n1, c.k1);
            const bool g = label(cell.rep, x);
            const double nb = static_cast<double>(g ? c.n1 : c.n0), kb = static_cast<double>(g ? c.k1 : c.k0);
            lw.push_back(cell.ln_weight + lq);
            lw1.push_back(cell.ln_weight + lq + std::log((kb + a) / (nb + 2.0 * a)));
        }
        return Pmf2::from_p1(std::exp(log_sum_exp(lw1) - log_sum_exp(lw)));
    }

    void update(const Point& x, Bit y) {
        xs_.push_back(x);
        ys_.push_back(y);
    }

    /// Cells for a point set, exposed for tests.
    struct Cell {
        double ln_weight;
        Labeler rep;
    };

    std::vector<Cell> enumerate_cells(std::span<const Point> pts) const {
        if (std::holds_alternative<Halfspace2DClass>(cls_.kind())) return halfspace_cells(pts);
        return rectangle_cells(std::get<RectangleClass>(cls_.kind()).d, pts);
    }

private:
    std::vector<Cell> halfspace_cells(std::span<const Point> pts) const {
        const auto crit = detail::critical_angles(pts);
        if (crit.size() > max_cells_) throw DomainError("exact halfspace cell count exceeds limit");
        std::vector<Cell> out;
        constexpr double two_pi = 2.0 * std::numbers::pi;
        for (std::size_t i = 0; i < crit.size(); ++i) {
            const double next = i + 1 < crit.size() ? crit[i + 1] : crit[0] + two_pi;
            const double len = next - crit[i];
            if (len <= 0.0) continue;
            out.push_back({std::log(len / two_pi), Halfspace2D{detail::wrap_angle((crit[i] + next) / 2.0)}});
        }
        return out;
    }

    std::vector<Cell> rectangle_cells(std::size_t d, std::span<const Point> pts) const {
        // Per axis: (ln probability, lower, upper) for each gap pair k <= l.
        struct AxisCell {
            double ln_weight, lo, hi;
        };
        std::vector<std::vector<AxisCell>> axes(d);
        double total = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            std::vector<double> v{0.0, 1.0};
            for (const auto& x : pts) {
                detail::check_unit_box(x, d);
                v.push_back(x[i]);
            }
            std::sort(v.begin(), v.end());
            std::vector<double> len, mid;
            for (std::size_t j = 0; j + 1 < v.size(); ++j) {
                len.push_back(v[j + 1] - v[j]);
                mid.push_back((v[j] + v[j + 1]) / 2.0);
            }
            for (std::size_t k = 0; k < len.size(); ++k)
                for (std::size_t l = k; l < len.size(); ++l) {
                    const double w = k == l ? len[k] * len[k] : 2.0 * len[k] * len[l];
                    if (w > 0.0) axes[i].push_back({std::log(w), mid[k], mid[l]});
                }
            total *= static_cast<double>(axes[i].size());
        }
        if (total > static_cast<double>(max_cells_)) throw DomainError("exact rectangle cell count exceeds limit");

        std::vector<Cell> out;
        std::vector<std::size_t> idx(d, 0);
        std::array<double, Point::kMaxDim> lo{}, hi{};
        for (;;) {
            double lw = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const auto& c = axes[i][idx[i]];
                lw += c.ln_weight;
                lo[i] = c.lo;
                hi[i] = c.hi;
            }
            out.push_back({lw, Rectangle(std::span<const double>(lo.data(), d), std::span<const double>(hi.data(), d))});
            std::size_t axis = d;
            while (axis > 0) {
                --axis;
                if (++idx[axis] < axes[axis].size()) break;
                idx[axis] = 0;
                if (axis == 0) return out;
            }
        }
    }

    FunctionClass cls_;
    ThetaPrior prior_;
    std::size_t max_cells_;
    std::vector<Point> xs_;
    std::vector<Bit> ys_;
};

// ---------------------------------------------------------------------------
// Doubling-epoch mixture. Time t = 1 predicts (1/2, 1/2). Epoch j covers
// t in [2^(j-1) + 1, 2^j]; at its first step the inner mixture is rebuilt over
// the projection of x_1..x_{2^(j-1)} with empty counts. The final epoch is cut
// at whatever horizon the caller stops at.

class EpochPredictor {
public:
    explicit EpochPredictor(FunctionClass cls, ThetaPrior prior = ThetaPrior::Uniform)
        : cls_(std::move(cls)), prior_(prior) {}

    /// Time index of the next prediction (1-based).
    std::size_t time() const { return prefix_.size() + 1; }

    /// Current epoch index, 0 before the first epoch starts.
    std::size_t epoch() const { return epoch_; }

    const std::optional<Mixture>& inner() const { return inner_; }

    static bool is_epoch_start(std::size_t t) { return t >= 2 && std::has_single_bit(t - 1); }

    Pmf2 predict(const Point& x) {
        if (time() == 1) return {0.5, 0.5};
        sync_epoch();
        return inner_->predict(x);
    }

    void update(const Point& x, Bit y) {
        if (time() > 1) {
            sync_epoch();
            inner_->update(x, y);
        }
        prefix_.push_back(x);
    }

    Pmf2 predict_at(std::size_t t, const Point& x) {
        check_time(t);
        return predict(x);
    }

    void update_at(std::size_t t, const Point& x, Bit y) {
        check_time(t);
        update(x, y);
    }

private:
    void check_time(std::size_t t) const {
        if (t != time()) throw DomainError("epoch predictor time must advance by exactly one");
    }

    void sync_epoch() {
        const std::size_t t = time();
        if (!is_epoch_start(t) || built_for_ == t) return;
        auto patterns = project(cls_, prefix_);
        std::vector<Labeler> reps;
        reps.reserve(patterns.size());
        for (auto& p : patterns) reps.push_back(std::move(p.representative));
        inner_.emplace(std::move(reps), prior_);
        built_for_ = t;
        ++epoch_;
    }

    FunctionClass cls_;
    ThetaPrior prior_;
    std::vector<Point> prefix_;
    std::optional<Mixture> inner_;
    std::size_t built_for_ = 0;
    std::size_t epoch_ = 0;
};

// ---------------------------------------------------------------------------

/// Predicts with nature's own conditional law; zero regret by construction.
class TruthPredictor {
public:
    explicit TruthPredictor(Hypothesis h) : h_(std::move(h)) {}
    Pmf2 predict(const Point& x) const { return cond_pmf(h_, x); }
    void update(const Point&, Bit) {}

private:
    Hypothesis h_;
};

/// Value-semantic type-erased predictor.
class AnyPredictor {
public:
    template <SequentialPredictor P>
        requires(!std::same_as<std::remove_cvref_t<P>, AnyPredictor>)
    AnyPredictor(P p) : self_(std::make_unique<Model<P>>(std::move(p))) {}

    AnyPredictor(const AnyPredictor& o) : self_(o.self_->clone()) {}
    AnyPredictor(AnyPredictor&&) noexcept = default;
    AnyPredictor& operator=(const AnyPredictor& o) {
        if (this != &o) self_ = o.self_->clone();
        return *this;
    }
    AnyPredictor& operator=(AnyPredictor&&) noexcept = default;

    Pmf2 predict(const Point& x) { return self_->predict(x); }
    void update(const Point& x, Bit y) { self_->update(x, y); }

    template <class P>
    const P* target() const {
        auto* m = dynamic_cast<const Model<P>*>(self_.get());
        return m ? &m->impl : nullptr;
    }

private:
    struct Concept {
        virtual ~Concept() = default;
        virtual Pmf2 predict(const Point&) = 0;
        virtual void update(const Point&, Bit) = 0;
        virtual std::unique_ptr<Concept> clone() const = 0;
    };
    template <class P>
    struct Model final : Concept {
        explicit Model(P p) : impl(std::move(p)) {}
        Pmf2 predict(const Point& x) override { return impl.predict(x); }
        void update(const Point& x, Bit y) override { impl.update(x, y); }
        std::unique_ptr<Concept> clone() const override { return std::make_unique<Model>(impl); }
        P impl;
    };
    std::unique_ptr<Concept> self_;
};

}  // namespace lsp
