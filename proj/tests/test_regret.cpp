#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lsp/bounds.hpp"
#include "lsp/regret.hpp"
#include "support.hpp"

using namespace lsp;

namespace {

const Labeler kIdentity = FiniteTable{{0, 1}};

NatureConfig symbol_nature(std::vector<double> px, Hypothesis h, std::size_t n) {
    return {FiniteDist{std::move(px)}, std::move(h), n};
}

/// Always puts all mass on y = 0.
struct Stubborn {
    Pmf2 predict(const Point&) const { return {1.0, 0.0}; }
    void update(const Point&, Bit) {}
};

}  // namespace

// ---------------------------------------------------------------------------
// Samplers

TEST(Sampler, ValidationAndDomains) {
    EXPECT_THROW(validate(XSampler{FiniteDist{{0.5, 0.4}}}), DomainError);
    EXPECT_THROW(validate(XSampler{FiniteDist{{1.2, -0.2}}}), DomainError);
    EXPECT_THROW(validate(XSampler{FiniteDist{{}}}), DomainError);
    EXPECT_NO_THROW(validate(XSampler{FiniteDist{{0.25, 0.75}}}));
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        const auto c = sample_x(XSampler{UniformCircle{}}, rng);
        ASSERT_NEAR(c[0] * c[0] + c[1] * c[1], 1.0, 1e-12);
        const auto b = sample_x(XSampler{UniformBox{3}}, rng);
        ASSERT_EQ(b.dim(), 3u);
        for (double v : b.coords()) ASSERT_TRUE(v >= 0.0 && v < 1.0);
        const auto s = sample_x(XSampler{FiniteDist{{0.0, 1.0, 0.0}}}, rng);
        ASSERT_EQ(s.as_symbol(3), 1u);
        const auto p = sample_x(XSampler{PowerInterval{3.0}}, rng);
        ASSERT_TRUE(p[0] >= 0.0 && p[0] <= 1.0);
    }
}

// ---------------------------------------------------------------------------
// Single trials

TEST(SimulateTrial, TruthHasZeroRegretEveryStep) {
    const NatureConfig nat{UniformInterval{}, Hypothesis{Threshold{0.3, 1}, 0.2, 0.9}, 200};
    const auto tr = simulate_trial(nat, truth_factory(), 5);
    ASSERT_EQ(tr.cumulative.size(), 200u);
    for (double c : tr.cumulative) EXPECT_EQ(c, 0.0);
    EXPECT_EQ(tr.seed, 5u);
}

TEST(SimulateTrial, FairCoinNatureLossIsOneBit) {
    const NatureConfig nat{UniformInterval{}, Hypothesis{Threshold{0.3, 1}, 0.5, 0.5}, 100};
    const auto tr = simulate_trial(nat, kt_factory(), 9);
    for (double l : tr.loss_p) EXPECT_EQ(l, 1.0);
    double cum = 0.0;
    for (std::size_t i = 0; i < tr.loss_q.size(); ++i) {
        ASSERT_GE(tr.loss_q[i], 0.0);
        cum += tr.loss_q[i] - tr.loss_p[i];
        ASSERT_NEAR(tr.cumulative[i], cum, 1e-12);
    }
}

TEST(SimulateTrial, KtOnAllZeros) {
    const NatureConfig nat{UniformInterval{}, Hypothesis{ConstantLabeler{0}, 0.0, 0.0}, 2};
    const auto tr = simulate_trial(nat, kt_factory(), 3);
    EXPECT_NEAR(tr.regret(), -std::log2(0.5 * 0.75), 1e-14);
    EXPECT_NEAR(tr.regret(), 3.0 - std::log2(3.0), 1e-14);
}

TEST(SimulateTrial, Reproducible) {
    const NatureConfig nat{UniformBox{2}, Hypothesis{Rectangle({0.2, 0.1}, {0.7, 0.8}), 0.1, 0.85}, 20};
    const auto f = noncausal_factory(FunctionClass::rectangles(2));
    const auto a = simulate_trial(nat, f, 77), b = simulate_trial(nat, f, 77), c = simulate_trial(nat, f, 78);
    EXPECT_EQ(a.loss_q, b.loss_q);
    EXPECT_EQ(a.cumulative, b.cumulative);
    EXPECT_NE(a.cumulative, c.cumulative);
}

TEST(SimulateTrial, ClampsZeroMass) {
    const PredictorFactory f{"stubborn", [](const TrialContext&) { return AnyPredictor(Stubborn{}); }};
    const NatureConfig nat{UniformInterval{}, Hypothesis{ConstantLabeler{0}, 1.0, 1.0}, 10};
    const auto tr = simulate_trial(nat, f, 1);
    EXPECT_EQ(tr.clamp_events, 10u);
    EXPECT_EQ(tr.regret(), 640.0);
}

// ---------------------------------------------------------------------------
// Exact expectation

TEST(ExactRegret, BlockKtFairCoinTwoSteps) {
    const double hand = 1.0 + 0.5 * (2.0 - 0.5 * std::log2(3.0)) + 0.5 * 1.0 - 2.0;
    const double r = expected_regret_exact({0.5, 0.5}, Hypothesis{kIdentity, 0.5, 0.5}, blockwise_factory(kIdentity), 2);
    EXPECT_NEAR(r, hand, 1e-14);
    EXPECT_NEAR(r, 0.1038, 1e-4);
}

TEST(ExactRegret, TruthIsZero) {
    for (std::size_t n = 1; n <= 6; ++n)
        EXPECT_NEAR(expected_regret_exact({0.3, 0.7}, Hypothesis{kIdentity, 0.15, 0.8}, truth_factory(), n), 0.0, 1e-15);
}

TEST(ExactRegret, KtSingleStepAtThetaZero) {
    EXPECT_NEAR(expected_regret_exact({1.0}, Hypothesis{ConstantLabeler{0}, 0.0, 0.0}, kt_factory(), 1), 1.0, 1e-15);
}

TEST(ExactRegret, KtMatchesClosedFormExpectation) {
    // E[-log2 kt_joint(n, K)] - n h(theta), K ~ Bin(n, theta).
    for (double th : {0.1, 0.5, 0.85})
        for (unsigned n = 1; n <= 8; ++n) {
            double e = 0.0;
            for (unsigned k = 0; k <= n; ++k)
                e += test::binom(n, k) * std::pow(th, k) * std::pow(1.0 - th, n - k) *
                     -std::log2(test::kt_joint_oracle(n, k));
            const double h = -th * std::log2(th) - (1.0 - th) * std::log2(1.0 - th);
            EXPECT_NEAR(expected_regret_exact({1.0}, Hypothesis{ConstantLabeler{0}, th, th}, kt_factory(), n), e - n * h,
                        1e-12);
        }
}

TEST(ExactRegret, BudgetExceeded) {
    EXPECT_THROW(expected_regret_exact(std::vector<double>(4, 0.25), Hypothesis{}, kt_factory(), 10), BudgetExceeded);
    try {
        expected_regret_exact(std::vector<double>(4, 0.25), Hypothesis{}, kt_factory(), 10);
    } catch (const BudgetExceeded& e) {
        EXPECT_NE(std::string(e.what()).find("1e7"), std::string::npos);
    }
}

TEST(ExactRegret, NonNegativeForMixtures) {
    std::mt19937_64 rng(2);
    const auto f = finite_mixture_factory(FunctionClass::full_tables(2));
    for (int rep = 0; rep < 10; ++rep) {
        const Hypothesis h{test::random_table(rng, 2), uniform01(rng), uniform01(rng)};
        EXPECT_GE(expected_regret_exact(test::random_pmf(rng, 2), h, f, 5), -1e-12);
    }
}

// ---------------------------------------------------------------------------
// Worst case

TEST(WorstCase, KtOneStepIsOneBitAtEndpoints) {
    const std::vector<Labeler> gs{ConstantLabeler{0}};
    const auto wc = worst_case_regret_exact(kt_factory(), gs, 0.05, {{1.0}}, 1);
    EXPECT_NEAR(wc.regret, 1.0, 1e-15);
    EXPECT_TRUE(wc.argmax.theta0 == 0.0 || wc.argmax.theta0 == 1.0);
}

TEST(WorstCase, TruthIsZero) {
    const std::vector<Labeler> gs{kIdentity};
    EXPECT_NEAR(worst_case_regret_exact(truth_factory(), gs, 0.25, {{0.5, 0.5}}, 3).regret, 0.0, 1e-15);
}

TEST(WorstCase, FastPathMatchesDirectEnumeration) {
    const auto cls = FunctionClass::full_tables(2);
    const auto f = finite_mixture_factory(cls);
    const auto px_list = default_px_list(2);
    const std::size_t n = 4;
    const auto wc = worst_case_regret_exact(f, cls.members(), 0.25, px_list, n);
    double best = -INFINITY;
    for (const auto& px : px_list)
        for (const auto& g : cls.members())
            for (double t0 : theta_grid(0.25))
                for (double t1 : theta_grid(0.25))
                    best = std::max(best, expected_regret_exact(px, Hypothesis{g, t0, t1}, f, n));
    EXPECT_NEAR(wc.regret, best, 1e-12);
}

TEST(WorstCase, GridsAndErrors) {
    EXPECT_EQ(theta_grid(0.05).size(), 21u);
    EXPECT_EQ(theta_grid(0.05)[20], 1.0);
    EXPECT_THROW(theta_grid(0.3), DomainError);
    EXPECT_THROW(theta_grid(0.0), DomainError);
    const auto px = default_px_list(3);
    ASSERT_EQ(px.size(), 5u);
    EXPECT_NEAR(px[4][0], 0.9, 1e-15);
    EXPECT_NEAR(px[4][2], 0.05, 1e-15);
    EXPECT_THROW(worst_case_regret_exact(kt_factory(), std::vector<Labeler>{}, 0.5, {{1.0}}, 1), DomainError);
}

// ---------------------------------------------------------------------------
// Monte Carlo

TEST(MonteCarlo, TruthMeanAndSeAreZero) {
    const auto est = expected_regret_mc({UniformInterval{}, Hypothesis{Threshold{0.5, 1}, 0.1, 0.9}, 50}, truth_factory(),
                                        20, 1, 1);
    EXPECT_EQ(est.mean, 0.0);
    EXPECT_EQ(est.se, 0.0);
}

TEST(MonteCarlo, AgreesWithExactWithinThreeSe) {
    const Hypothesis h{kIdentity, 0.2, 0.7};
    const auto f = blockwise_factory(kIdentity);
    const double exact = expected_regret_exact({0.4, 0.6}, h, f, 8);
    const auto est = expected_regret_mc(symbol_nature({0.4, 0.6}, h, 8), f, 20000, 100, 1);
    EXPECT_LE(std::abs(est.mean - exact), 3.0 * est.se);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
    const NatureConfig nat{UniformInterval{}, Hypothesis{Threshold{0.4, 0}, 0.3, 0.6}, 40};
    const auto f = epoch_factory(FunctionClass::thresholds());
    const auto a = expected_regret_mc(nat, f, 64, 5, 1);
    const auto b = expected_regret_mc(nat, f, 64, 5, 3);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.se, b.se);
    EXPECT_THROW(expected_regret_mc(nat, f, 1, 5, 1), DomainError);
}

TEST(Quantile, EmpiricalIndex) {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    EXPECT_EQ(empirical_quantile(v, 0.1), 90.0);
    EXPECT_EQ(empirical_quantile(v, 0.05), 95.0);
    EXPECT_EQ(empirical_quantile({3.0}, 0.5), 3.0);
    EXPECT_THROW(empirical_quantile({}, 0.1), DomainError);
}

TEST(Quantile, HighProbabilityRegret) {
    const NatureConfig truth_nat{UniformInterval{}, Hypothesis{Threshold{0.5, 1}, 0.3, 0.6}, 30};
    EXPECT_EQ(high_prob_regret_quantile(truth_nat, truth_factory(), 500, 0.1, 1, 1), 0.0);
    EXPECT_THROW(high_prob_regret_quantile(truth_nat, truth_factory(), 499, 0.1, 1, 1), DomainError);

    const NatureConfig coin{UniformInterval{}, Hypothesis{ConstantLabeler{0}, 0.5, 0.5}, 64};
    const auto rs = trial_regrets(coin, kt_factory(), 1000, 3, 1);
    const auto est = summarize(rs);
    EXPECT_GE(high_prob_regret_quantile(coin, kt_factory(), 1000, 0.1, 3, 1), est.mean);
}

// ---------------------------------------------------------------------------
// Bound evaluators

TEST(Bounds, SpecExamples) {
    const double l = std::log2(std::numbers::pi * std::numbers::pi / 8.0);
    EXPECT_NEAR(l, 0.3030, 5e-5);
    EXPECT_NEAR(bounds::finite_class(6, 4), 4.3030, 1e-4);
    EXPECT_NEAR(bounds::thm2_lower(100, 1), 4.400, 1e-3);
    EXPECT_NEAR(bounds::thm1(1024, 1), 11000102.0, 1e-6);
    EXPECT_NEAR(bounds::blockkt(4), std::log2(3.0) + l, 1e-15);
    EXPECT_NEAR(bounds::fano_floor(100, 1), bounds::thm2_lower(100, 1), 1e-12);
    EXPECT_NEAR(bounds::fano_floor(5000, 4), 13.19, 5e-3);
    EXPECT_NEAR(bounds::ghat_error(5000, 4), 0.125, 1e-12);
    EXPECT_GT(bounds::ghat_error(50, 2), 1.0);
}

TEST(Bounds, FormulasAgainstIndependentEvaluation) {
    const double e = std::numbers::e, l = std::log2(std::numbers::pi * std::numbers::pi / 8.0);
    for (std::size_t n : {2u, 7u, 64u, 1000u})
        for (std::size_t d : {1u, 2u, 5u}) {
            const double N = n, D = d, C = 250.0, delta = 0.1;
            EXPECT_NEAR(bounds::noncausal(n, d), D * std::log2(e * N / D) + std::log2(N / 2 + 1) + l, 1e-9);
            EXPECT_NEAR(bounds::known_px(n, d), (D + 8) * (4 / std::log(2.0) + std::log2(N)) + 6, 1e-9);
            EXPECT_NEAR(bounds::halfspace(n, d), (2 * D + 1) * std::log2(N) + D * std::log2(48 * D) + l, 1e-9);
            EXPECT_NEAR(bounds::rect(n, d), (2 * D + 1) * std::log2(N + 1) + l, 1e-9);
            EXPECT_NEAR(bounds::aux(n, d), D * std::log2(e * N / D) + 16 * C * std::sqrt(N * D) * std::log2(6 * N + 2),
                        1e-6);
            const double hp = 25 * C * std::sqrt(D * N) * std::log2(2 * N) *
                                  (C * std::sqrt(D) + std::sqrt(2 * std::log2(2 * std::log2(N) / delta))) +
                              D * std::log2(N) * std::log2(N) + 2;
            EXPECT_NEAR(bounds::thm1_hp(n, d, C, delta), hp, 1e-6 * hp);
        }
    EXPECT_THROW(bounds::thm1_hp(1, 1, 250, 0.1), DomainError);
    EXPECT_THROW(bounds::thm1_hp(8, 1, 250, 1.5), DomainError);
}

TEST(Bounds, TableRowsEqualEvaluators) {
    const auto t = bounds::table(64, 2, 100.0, 0.05);
    ASSERT_EQ(t.size(), 11u);
    for (const auto& r : t) {
        double v = 0.0;
        if (r.name == "blockkt") v = bounds::blockkt(64);
        if (r.name == "finite_class") v = bounds::finite_class(64, 4);
        if (r.name == "noncausal") v = bounds::noncausal(64, 2);
        if (r.name == "known_px") v = bounds::known_px(64, 2);
        if (r.name == "halfspace") v = bounds::halfspace(64, 2);
        if (r.name == "rect") v = bounds::rect(64, 2);
        if (r.name == "aux") v = bounds::aux(64, 2, 100.0);
        if (r.name == "thm1") v = bounds::thm1(64, 2, 100.0);
        if (r.name == "thm1_hp") v = bounds::thm1_hp(64, 2, 100.0, 0.05);
        if (r.name == "thm2_lower") v = bounds::thm2_lower(64, 2);
        if (r.name == "fano_floor") v = bounds::fano_floor(64, 2);
        EXPECT_EQ(r.bits, v) << r.name;
    }
    EXPECT_EQ(bounds::table(1, 1).size(), 10u);
}

TEST(Bounds, SandwichScanSpotCheck) {
    for (std::size_t m = 1; m <= 10; ++m)
        for (std::size_t n = 1; n <= 1000000; n *= 10)
            EXPECT_LE(bounds::fano_floor(n, m), bounds::finite_class(n, std::size_t{1} << m));
}
