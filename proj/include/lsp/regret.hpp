#pragma once

// Nature simulation and regret measurement: single seeded trials, exact
// enumeration over (x^n, y^n) for small finite alphabets, Monte-Carlo
// averages, worst case over a finite hypothesis / P_X grid, and empirical
// high-probability quantiles. Everything is reported in bits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "lsp/core.hpp"
#include "lsp/hypothesis.hpp"
#include "lsp/parallel.hpp"
#include "lsp/predictors.hpp"

namespace lsp {

// ---------------------------------------------------------------------------
// Side-information samplers

/// P_X over the symbols 0..m-1.
struct FiniteDist {
    std::vector<double> p;
};
/// Uniform on [0,1].
struct UniformInterval {};
/// x = u^alpha with u uniform on [0,1]; alpha > 1 piles mass near 0.
struct PowerInterval {
    double alpha = 1.0;
};
/// Uniform on the unit circle.
struct UniformCircle {};
/// Uniform on [0,1]^d.
struct UniformBox {
    std::size_t d = 1;
};

using XSampler = std::variant<FiniteDist, UniformInterval, PowerInterval, UniformCircle, UniformBox>;

inline void validate(const XSampler& s) {
    if (const auto* f = std::get_if<FiniteDist>(&s)) {
        if (f->p.empty()) throw DomainError("P_X must have at least one symbol");
        double sum = 0.0;
        for (double v : f->p) {
            if (!(v >= 0.0)) throw DomainError("P_X entries must be non-negative");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw DomainError("P_X must sum to 1");
    } else if (const auto* pw = std::get_if<PowerInterval>(&s)) {
        if (!(pw->alpha > 0.0)) throw DomainError("power sampler needs alpha > 0");
    } else if (const auto* b = std::get_if<UniformBox>(&s)) {
        if (b->d == 0 || b->d > Point::kMaxDim) throw DomainError("box dimension out of range");
    }
}

template <class Rng>
Point sample_x(const XSampler& s, Rng& rng) {
    struct Visitor {
        Rng& rng;
        Point operator()(const FiniteDist& f) const {
            const double u = uniform01(rng);
            double acc = 0.0;
            std::size_t last = 0;
            for (std::size_t l = 0; l < f.p.size(); ++l) {
                if (f.p[l] <= 0.0) continue;
                last = l;
                acc += f.p[l];
                if (u < acc) return Point::symbol(l);
            }
            return Point::symbol(last);
        }
        Point operator()(const UniformInterval&) const { return Point::scalar(uniform01(rng)); }
        Point operator()(const PowerInterval& p) const { return Point::scalar(std::pow(uniform01(rng), p.alpha)); }
        Point operator()(const UniformCircle&) const {
            const double phi = 2.0 * std::numbers::pi * uniform01(rng);
            return Point{std::cos(phi), std::sin(phi)};
        }
        Point operator()(const UniformBox& b) const {
            std::array<double, Point::kMaxDim> c{};
            for (std::size_t i = 0; i < b.d; ++i) c[i] = uniform01(rng);
            return Point(std::span<const double>(c.data(), b.d));
        }
    };
    return std::visit(Visitor{rng}, s);
}

struct NatureConfig {
    XSampler px;
    Hypothesis hypothesis;
    std::size_t n = 0;
};

// ---------------------------------------------------------------------------
// Predictor factories

/// What a factory may look at when building a fresh predictor for one trial.
struct TrialContext {
    std::span<const Point> x_all;  ///< the full side-information sequence
    const Hypothesis& truth;
    std::uint64_t seed;
};

struct PredictorFactory {
    std::string name;
    std::function<AnyPredictor(const TrialContext&)> make;
    bool uses_truth = false;  ///< predictions depend on the hypothesis
};

inline PredictorFactory truth_factory() {
    return {"truth", [](const TrialContext& c) { return AnyPredictor(TruthPredictor(c.truth)); }, true};
}

inline PredictorFactory blockwise_factory(Labeler g_star, ThetaPrior prior = ThetaPrior::Jeffreys) {
    return {"blockwise", [g = std::move(g_star), prior](const TrialContext&) {
                return AnyPredictor(BlockwiseEstimator(g, prior));
            }};
}

inline PredictorFactory kt_factory() { return blockwise_factory(ConstantLabeler{0}, ThetaPrior::Jeffreys); }

inline PredictorFactory finite_mixture_factory(const FunctionClass& cls, ThetaPrior prior = ThetaPrior::Jeffreys) {
    return {"finite_mixture", [proto = finite_mixture(cls, prior)](const TrialContext&) { return AnyPredictor(proto); }};
}

inline PredictorFactory noncausal_factory(FunctionClass cls, ThetaPrior prior = ThetaPrior::Jeffreys) {
    return {"noncausal", [cls = std::move(cls), prior](const TrialContext& c) {
                return AnyPredictor(noncausal_mixture(cls, c.x_all, prior));
            }};
}

inline PredictorFactory covering_factory(const FunctionClass& cls, std::vector<double> px, std::size_t horizon,
                                         ThetaPrior prior = ThetaPrior::Uniform) {
    return {"covering",
            [proto = covering_mixture(cls, px, horizon, prior)](const TrialContext&) { return AnyPredictor(proto); }};
}

inline PredictorFactory epoch_factory(FunctionClass cls, ThetaPrior prior = ThetaPrior::Uniform) {
    return {"epoch", [cls = std::move(cls), prior](const TrialContext&) {
                return AnyPredictor(EpochPredictor(cls, prior));
            }};
}

/// The sampled labelers are drawn once here and shared by every trial.
inline PredictorFactory param_mc_factory(const FunctionClass& cls, std::size_t samples, std::uint64_t seed,
                                         ThetaPrior prior = ThetaPrior::Jeffreys) {
    return {"param_mc", [proto = sampled_param_mixture(cls, samples, seed, prior)](const TrialContext&) {
                return AnyPredictor(proto);
            }};
}

inline PredictorFactory param_exact_factory(FunctionClass cls, ThetaPrior prior = ThetaPrior::Jeffreys) {
    return {"param_exact", [cls = std::move(cls), prior](const TrialContext&) {
                return AnyPredictor(ExactCellMixture(cls, prior));
            }};
}

// ---------------------------------------------------------------------------
// Single trial

inline constexpr double kMinAssignedMass = 0x1.0p-64;

struct RegretTrace {
    std::vector<double> loss_q;      ///< -log2 q(y_i | ...)
    std::vector<double> loss_p;      ///< -log2 p_f(y_i | x_i)
    std::vector<double> cumulative;  ///< running sum of loss_q - loss_p
    std::uint64_t seed = 0;
    std::size_t clamp_events = 0;

    double regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

namespace detail {

/// -log2 of an assigned mass, clamped at kMinAssignedMass.
inline double clamped_loss(double q, std::size_t& clamps) {
    if (!(q >= kMinAssignedMass)) {
        ++clamps;
        q = kMinAssignedMass;
    }
    return -std::log2(q);
}

/// Nature's loss; zero-probability outcomes never occur in valid traces.
inline double nature_loss(double p) { return p >= 1.0 ? 0.0 : -std::log2(p); }

inline double binary_entropy(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return -t * std::log2(t) - (1.0 - t) * std::log2(1.0 - t);
}

}  // namespace detail

/// Draws X_1..X_n first, then Y_1..Y_n, from one mt19937_64 seeded with `seed`.
inline RegretTrace simulate_trial(const NatureConfig& nature, const PredictorFactory& factory, std::uint64_t seed) {
    validate(nature.px);
    validate(nature.hypothesis);
    std::mt19937_64 rng(seed);
    std::vector<Point> xs;
    xs.reserve(nature.n);
    for (std::size_t i = 0; i < nature.n; ++i) xs.push_back(sample_x(nature.px, rng));
    std::vector<Pmf2> truth;
    truth.reserve(nature.n);
    std::vector<Bit> ys;
    ys.reserve(nature.n);
    for (const auto& x : xs) {
        truth.push_back(cond_pmf(nature.hypothesis, x));
        ys.push_back(bernoulli(rng, truth.back().p1));
    }

    RegretTrace tr;
    tr.seed = seed;
    tr.loss_q.reserve(nature.n);
    tr.loss_p.reserve(nature.n);
    tr.cumulative.reserve(nature.n);
    AnyPredictor q = factory.make(TrialContext{xs, nature.hypothesis, seed});
    double cum = 0.0;
    for (std::size_t i = 0; i < nature.n; ++i) {
        const Pmf2 pq = q.predict(xs[i]);
        const double lq = detail::clamped_loss(pq[ys[i]], tr.clamp_events);
        const double lp = detail::nature_loss(truth[i][ys[i]]);
        cum += lq - lp;
        tr.loss_q.push_back(lq);
        tr.loss_p.push_back(lp);
        tr.cumulative.push_back(cum);
        q.update(xs[i], ys[i]);
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Exact enumeration

inline constexpr double kExactBudget = 1e7;

namespace detail {

inline void check_budget(std::size_t m, std::size_t n) {
    const double work = std::pow(static_cast<double>(m), static_cast<double>(n)) * std::exp2(static_cast<double>(n));
    if (work > kExactBudget)
        throw BudgetExceeded("exact enumeration needs m^n * 2^n <= 1e7 (got " + std::to_string(work) + ")");
}

/// Calls f(x^n, P(x^n)) for every x^n with positive probability.
template <class F>
void for_each_xseq(const std::vector<double>& px, std::size_t n, F&& f) {
    const std::size_t m = px.size();
    std::vector<std::size_t> idx(n, 0);
    std::vector<Point> xs(n, Point::symbol(0));
    for (;;) {
        double prob = 1.0;
        for (std::size_t i = 0; i < n; ++i) prob *= px[idx[i]];
        if (prob > 0.0) f(std::span<const Point>(xs), prob);
        std::size_t i = n;
        for (;;) {
            if (i == 0) return;
            --i;
            if (++idx[i] < m) {
                xs[i] = Point::symbol(idx[i]);
                break;
            }
            idx[i] = 0;
            xs[i] = Point::symbol(0);
        }
    }
}

/// Expected cumulative (predictor loss - nature loss) over y^n given x^n,
/// by depth-first search with predictor copies.
inline double expected_regret_given_x(AnyPredictor q, std::span<const Point> xs, const Hypothesis& h, std::size_t i,
                                      std::size_t& clamps) {
    if (i == xs.size()) return 0.0;
    const Pmf2 pq = q.predict(xs[i]);
    const Pmf2 pt = cond_pmf(h, xs[i]);
    double total = 0.0;
    for (Bit y : {Bit{0}, Bit{1}}) {
        if (pt[y] <= 0.0) continue;
        const double step = clamped_loss(pq[y], clamps) - nature_loss(pt[y]);
        const bool last = y == 1 || pt[1] <= 0.0;
        AnyPredictor child = last ? AnyPredictor(std::move(q)) : AnyPredictor(q);
        child.update(xs[i], y);
        total += pt[y] * (step + expected_regret_given_x(std::move(child), xs, h, i + 1, clamps));
    }
    return total;
}

/// Predictor codelength -log2 q(y^n | x^n) for every y^n; index bit i = y_{i+1}.
inline void fill_loss_table(AnyPredictor q, std::span<const Point> xs, std::size_t i, std::size_t code, double acc,
                            std::vector<double>& out, std::size_t& clamps) {
    if (i == xs.size()) {
        out[code] = acc;
        return;
    }
    const Pmf2 pq = q.predict(xs[i]);
    for (Bit y : {Bit{0}, Bit{1}}) {
        const double l = clamped_loss(pq[y], clamps);
        AnyPredictor child = y == 1 ? AnyPredictor(std::move(q)) : AnyPredictor(q);
        child.update(xs[i], y);
        fill_loss_table(std::move(child), xs, i + 1, code | (std::size_t{y} << i), acc + l, out, clamps);
    }
}

}  // namespace detail

/// Exact E[regret] for a finite P_X (alphabet <= 4 in the intended regime).
inline double expected_regret_exact(const std::vector<double>& px, const Hypothesis& h, const PredictorFactory& factory,
                                    std::size_t n) {
    validate(XSampler{FiniteDist{px}});
    validate(h);
    detail::check_budget(px.size(), n);
    double total = 0.0;
    std::size_t clamps = 0;
    detail::for_each_xseq(px, n, [&](std::span<const Point> xs, double prob) {
        AnyPredictor q = factory.make(TrialContext{xs, h, 0});
        total += prob * detail::expected_regret_given_x(std::move(q), xs, h, 0, clamps);
    });
    return total;
}

struct WorstCase {
    double regret = -INFINITY;
    Hypothesis argmax;
    std::size_t px_index = 0;
};

/// Grid {0, step, 2 step, ..., 1}.
inline std::vector<double> theta_grid(double step) {
    if (!(step > 0.0 && step <= 1.0)) throw DomainError("theta grid step must lie in (0,1]");
    const auto k = static_cast<std::size_t>(std::llround(1.0 / step));
    if (std::abs(static_cast<double>(k) * step - 1.0) > 1e-9) throw DomainError("theta grid step must divide 1");
    std::vector<double> g;
    for (std::size_t i = 0; i <= k; ++i) g.push_back(static_cast<double>(i) / static_cast<double>(k));
    return g;
}

/// Default P_X list over m symbols: uniform, each point mass, and a skewed
/// (0.9, 0.1/(m-1), ...) law.
inline std::vector<std::vector<double>> default_px_list(std::size_t m) {
    if (m == 0) throw DomainError("alphabet must be non-empty");
    std::vector<std::vector<double>> out;
    out.emplace_back(m, 1.0 / static_cast<double>(m));
    for (std::size_t l = 0; l < m; ++l) {
        std::vector<double> p(m, 0.0);
        p[l] = 1.0;
        out.push_back(std::move(p));
    }
    if (m > 1) {
        std::vector<double> p(m, 0.1 / static_cast<double>(m - 1));
        p[0] = 0.9;
        out.push_back(std::move(p));
    }
    return out;
}

/// Exact max over labelers x theta0-grid x theta1-grid x P_X list of the
/// expected regret. Predictors that ignore the hypothesis have their
/// codelength table over y^n computed once per x^n.
inline WorstCase worst_case_regret_exact(const PredictorFactory& factory, std::span<const Labeler> labelers,
                                         double theta_step, const std::vector<std::vector<double>>& px_list,
                                         std::size_t n) {
    if (labelers.empty() || px_list.empty()) throw DomainError("worst-case grid is empty");
    const auto grid = theta_grid(theta_step);
    const std::size_t m = px_list.front().size();
    for (const auto& px : px_list) {
        if (px.size() != m) throw DomainError("every P_X in the list must share one alphabet");
        validate(XSampler{FiniteDist{px}});
    }
    detail::check_budget(m, n);
    WorstCase best;
    auto consider = [&](double r, const Hypothesis& h, std::size_t pi) {
        if (r > best.regret) best = {r, h, pi};
    };

    if (factory.uses_truth) {
        for (std::size_t pi = 0; pi < px_list.size(); ++pi)
            for (const auto& g : labelers)
                for (double t0 : grid)
                    for (double t1 : grid) {
                        Hypothesis h{g, t0, t1};
                        consider(expected_regret_exact(px_list[pi], h, factory, n), h, pi);
                    }
        return best;
    }

    // x^n in odometer order with symbol i at base-m digit i (most significant
    // first), matching for_each_xseq.
    const std::size_t ny = std::size_t{1} << n;
    std::vector<std::vector<double>> tables;
    std::vector<std::vector<std::size_t>> xidx;
    std::size_t clamps = 0;
    const std::vector<double> uniform(m, 1.0 / static_cast<double>(m));
    const Hypothesis dummy{ConstantLabeler{0}, 0.5, 0.5};
    detail::for_each_xseq(uniform, n, [&](std::span<const Point> xs, double) {
        std::vector<double> t(ny);
        detail::fill_loss_table(factory.make(TrialContext{xs, dummy, 0}), xs, 0, 0, 0.0, t, clamps);
        tables.push_back(std::move(t));
        std::vector<std::size_t> ix;
        for (const auto& x : xs) ix.push_back(x.as_symbol(m));
        xidx.push_back(std::move(ix));
    });

    std::vector<double> py(ny);
    for (const auto& g : labelers) {
        std::vector<Bit> block(m);
        for (std::size_t l = 0; l < m; ++l) block[l] = label(g, Point::symbol(l));
        for (double t0 : grid)
            for (double t1 : grid) {
                const Hypothesis h{g, t0, t1};
                std::vector<double> per_x(tables.size());
                for (std::size_t xi = 0; xi < tables.size(); ++xi) {
                    // P(y^n | x^n) for all y^n, and nature's expected loss.
                    py[0] = 1.0;
                    double nat = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        const double th = h.theta(block[xidx[xi][i]]);
                        nat += detail::binary_entropy(th);
                        const std::size_t half = std::size_t{1} << i;
                        for (std::size_t c = 0; c < half; ++c) {
                            py[c | half] = py[c] * th;
                            py[c] *= 1.0 - th;
                        }
                    }
                    double e = 0.0;
                    for (std::size_t c = 0; c < ny; ++c)
                        if (py[c] > 0.0) e += py[c] * tables[xi][c];
                    per_x[xi] = e - nat;
                }
                for (std::size_t pi = 0; pi < px_list.size(); ++pi) {
                    double r = 0.0;
                    for (std::size_t xi = 0; xi < tables.size(); ++xi) {
                        double prob = 1.0;
                        for (std::size_t l : xidx[xi]) prob *= px_list[pi][l];
                        r += prob * per_x[xi];
                    }
                    consider(r, h, pi);
                }
            }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t trials = 0;
    std::size_t clamp_events = 0;
};

struct TrialResult {
    double regret = 0.0;
    std::size_t clamp_events = 0;
};

/// Final regret of trials base_seed, base_seed + 1, ... in trial order.
inline std::vector<TrialResult> trial_regrets(const NatureConfig& nature, const PredictorFactory& factory,
                                              std::size_t trials, std::uint64_t base_seed,
                                              std::size_t threads = default_threads()) {
    return parallel_map<TrialResult>(
        trials,
        [&](std::size_t i) {
            const auto tr = simulate_trial(nature, factory, base_seed + i);
            return TrialResult{tr.regret(), tr.clamp_events};
        },
        threads);
}

inline McEstimate summarize(const std::vector<TrialResult>& rs) {
    McEstimate e;
    e.trials = rs.size();
    if (rs.empty()) return e;
    double s = 0.0;
    for (const auto& r : rs) {
        s += r.regret;
        e.clamp_events += r.clamp_events;
    }
    e.mean = s / static_cast<double>(rs.size());
    if (rs.size() > 1) {
        double ss = 0.0;
        for (const auto& r : rs) ss += (r.regret - e.mean) * (r.regret - e.mean);
        e.se = std::sqrt(ss / static_cast<double>(rs.size() - 1) / static_cast<double>(rs.size()));
    }
    return e;
}

inline McEstimate expected_regret_mc(const NatureConfig& nature, const PredictorFactory& factory, std::size_t trials,
                                     std::uint64_t base_seed, std::size_t threads = default_threads()) {
    if (trials < 2) throw DomainError("Monte-Carlo regret needs at least 2 trials");
    return summarize(trial_regrets(nature, factory, trials, base_seed, threads));
}

/// Empirical (1 - delta)-quantile: the ceil((1 - delta) T)-th smallest value.
inline double empirical_quantile(std::vector<double> v, double delta) {
    if (v.empty()) throw DomainError("quantile of an empty sample");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(std::ceil((1.0 - delta) * static_cast<double>(v.size())));
    return v[std::clamp<std::size_t>(k, 1, v.size()) - 1];
}

inline double high_prob_regret_quantile(const NatureConfig& nature, const PredictorFactory& factory,
                                        std::size_t trials, double delta, std::uint64_t base_seed,
                                        std::size_t threads = default_threads()) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    if (static_cast<double>(trials) < 50.0 / delta)
        throw DomainError("high-probability quantile needs at least 50/delta trials");
    std::vector<double> v;
    for (const auto& r : trial_regrets(nature, factory, trials, base_seed, threads)) v.push_back(r.regret);
    return empirical_quantile(std::move(v), delta);
}

}  // namespace lsp
