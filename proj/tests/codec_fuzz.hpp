#pragma once

// Random (x, y, predictor spec) triples covering every predictor type.

#include <random>
#include <vector>

#include "lsp/spec_io.hpp"
#include "support.hpp"

namespace lsp::test {

struct CodecCase {
    io::PredictorSpec spec;
    std::vector<Point> x;
    std::vector<Bit> y;
};

/// Case `i` of a corpus cycles through the predictor types. Lengths are up
/// to `max_n`, shorter for the predictors whose per-step cost grows with n.
inline CodecCase codec_case(std::size_t i, std::uint64_t seed, std::size_t max_n = 4096) {
    std::mt19937_64 rng(mix_seed(seed + i));
    CodecCase c;
    const auto type = static_cast<io::PredictorType>(i % io::kPredictorTypeCount);
    c.spec.type = type;
    std::size_t cap = max_n;
    enum class Domain { Unit, Symbols, Circle } dom = Domain::Unit;
    Hypothesis h{Threshold{uniform01(rng), static_cast<Bit>(rng() & 1)}, uniform01(rng), uniform01(rng)};
    switch (type) {
        case io::PredictorType::Truth:
            c.spec.hypothesis = h;
            break;
        case io::PredictorType::KT:
        case io::PredictorType::Laplace:
            break;
        case io::PredictorType::Blockwise:
            c.spec.labeler = Threshold{uniform01(rng), 1};
            break;
        case io::PredictorType::FiniteMixture:
            c.spec.cls = FunctionClass::full_tables(3);
            dom = Domain::Symbols;
            break;
        case io::PredictorType::Covering:
            c.spec.cls = FunctionClass::full_tables(3);
            c.spec.px = random_pmf(rng, 3);
            dom = Domain::Symbols;
            break;
        case io::PredictorType::Noncausal:
            c.spec.cls = (rng() & 1) ? FunctionClass::thresholds() : FunctionClass::rectangles(1);
            cap = std::min<std::size_t>(cap, 400);
            break;
        case io::PredictorType::Epoch:
            c.spec.cls = (rng() & 1) ? FunctionClass::thresholds() : FunctionClass::rectangles(1);
            cap = std::min<std::size_t>(cap, 300);
            break;
        case io::PredictorType::ParamMC:
            c.spec.cls = FunctionClass::halfspaces2d();
            c.spec.samples = 1 + uniform_index(rng, 300);
            c.spec.seed = rng();
            dom = Domain::Circle;
            cap = std::min<std::size_t>(cap, 1000);
            break;
        case io::PredictorType::ParamExact:
            c.spec.cls = FunctionClass::halfspaces2d();
            dom = Domain::Circle;
            cap = std::min<std::size_t>(cap, 24);
            break;
    }
    if (rng() & 1) c.spec.prior = (rng() & 1) ? ThetaPrior::Jeffreys : ThetaPrior::Uniform;
    if (dom == Domain::Symbols) h = Hypothesis{random_table(rng, 3), uniform01(rng), uniform01(rng)};
    if (dom == Domain::Circle) h = Hypothesis{Halfspace2D{6.28 * uniform01(rng)}, uniform01(rng), uniform01(rng)};

    // Mostly short sequences, with an occasional long one.
    const std::size_t n = (rng() % 8 == 0) ? uniform_index(rng, cap + 1) : uniform_index(rng, std::min<std::size_t>(cap, 64) + 1);
    switch (dom) {
        case Domain::Unit:
            c.x = random_unit(rng, n);
            break;
        case Domain::Symbols:
            c.x = random_symbols(rng, n, 3);
            break;
        case Domain::Circle:
            c.x = random_circle(rng, n);
            break;
    }
    if (type == io::PredictorType::Truth) h = *c.spec.hypothesis;
    for (const auto& xi : c.x) c.y.push_back(bernoulli(rng, cond_pmf(h, xi).p1));
    return c;
}

}  // namespace lsp::test
