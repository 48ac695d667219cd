#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "codec_fuzz.hpp"
#include "lsp/bounds.hpp"
#include "lsp/codec.hpp"
#include "lsp/regret.hpp"

using namespace lsp;
using namespace lsp::codec;

namespace {

std::vector<std::uint8_t> encode_bytes(const test::CodecCase& c, QuantTrace* trace = nullptr) {
    return serialize(encode(c.x, c.y, c.spec, trace));
}

// Largest per-step penalty -log2(1 - 2^-11): nearest rounding to 1/65536 moves
// a mass of at least 1/64 by at most 2^-11 of itself.
const double kStepPenaltyCap = -std::log2(1.0 - std::ldexp(1.0, -11));

bool rejected(const std::vector<std::uint8_t>& bytes, std::span<const Point> x) {
    try {
        decode(bytes, x);
    } catch (const ChecksumError&) {
        return true;
    } catch (const FormatError&) {
        return true;
    }
    return false;
}

}  // namespace

TEST(Quantize, ClampsAndRounds) {
    EXPECT_EQ(quantize_p0({0.0, 1.0}), 1u);
    EXPECT_EQ(quantize_p0({1.0, 0.0}), 65535u);
    EXPECT_EQ(quantize_p0({0.5, 0.5}), 32768u);
    EXPECT_EQ(quantize_p0({1e-9, 1.0 - 1e-9}), 1u);
    EXPECT_EQ(quantize_p0({0.25, 0.75}), 16384u);
    EXPECT_DOUBLE_EQ(quantized_loss(32768, 0), 1.0);
    EXPECT_DOUBLE_EQ(quantized_loss(16384, 1), 16.0 - std::log2(49152.0));
}

TEST(Quantize, PerStepPenaltyInsideCentralRange) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200000; ++i) {
        const double p0 = 1.0 / 64.0 + (62.0 / 64.0) * uniform01(rng);
        const auto q0 = quantize_p0({p0, 1.0 - p0});
        for (Bit y : {Bit{0}, Bit{1}}) {
            const double pen = quantized_loss(q0, y) + std::log2(y ? 1.0 - p0 : p0);
            ASSERT_LE(pen, kStepPenaltyCap + 1e-12) << p0;
        }
    }
}

TEST(RangeCoder, RoundTripRandomProbabilities) {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = uniform_index(rng, 2000);
        std::vector<std::uint32_t> q(n);
        std::vector<Bit> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = rng() % 10;
            q[i] = r == 0 ? 1u : r == 1 ? 65535u : static_cast<std::uint32_t>(1 + rng() % 65535);
            // Mostly likely symbols, sometimes the improbable one.
            y[i] = (rng() % 7 == 0) ? static_cast<Bit>(rng() & 1) : static_cast<Bit>(q[i] < 32768);
        }
        RangeEncoder enc;
        double ideal = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            enc.encode(y[i], q[i]);
            ideal += quantized_loss(q[i], y[i]);
        }
        const auto bytes = enc.finish();
        RangeDecoder dec(bytes);
        for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(dec.decode(q[i]), y[i]) << "rep " << rep << " i " << i;
        const double bits = 8.0 * static_cast<double>(bytes.size());
        ASSERT_GE(bits, ideal - 1e-6);
        ASSERT_LE(bits, ideal + 32.0);
    }
}

TEST(RangeCoder, EmptyAndCarryHeavyStreams) {
    RangeEncoder e0;
    EXPECT_TRUE(e0.finish().empty());
    // Long runs of the top symbol at the extreme probability push carries far.
    for (std::uint32_t q0 : {1u, 2u, 65535u}) {
        RangeEncoder enc;
        std::vector<Bit> y(5000, q0 == 65535u ? 0 : 1);
        y[2500] = !y[2500];
        for (Bit b : y) enc.encode(b, q0);
        const auto bytes = enc.finish();
        RangeDecoder dec(bytes);
        for (Bit b : y) ASSERT_EQ(dec.decode(q0), b);
    }
}

TEST(Codec, EmptySequence) {
    io::PredictorSpec s;
    const auto blob = encode(std::vector<Point>{}, std::vector<Bit>{}, s);
    EXPECT_TRUE(blob.payload.empty());
    EXPECT_EQ(blob.n, 0u);
    EXPECT_TRUE(decode(serialize(blob), std::vector<Point>{}).empty());
}

TEST(Codec, AllZerosUnderKT) {
    const std::vector<Point> x(64, Point::symbol(0));
    const std::vector<Bit> y(64, 0);
    io::PredictorSpec s;
    s.type = io::PredictorType::KT;
    const auto blob = encode(x, y, s);
    const double ideal = -std::log2(kt_joint(64, 0));
    EXPECT_NEAR(ideal, -std::log2(test::kt_joint_oracle(64, 0)), 1e-9);
    EXPECT_NEAR(ideal, 3.9, 0.1);
    EXPECT_LE(8.0 * static_cast<double>(blob.payload.size()), std::ceil(ideal) + 32.0);
    EXPECT_EQ(decode(serialize(blob), x), y);
}

TEST(Codec, FairCoinDoesNotCompress) {
    std::mt19937_64 rng(3);
    const std::size_t n = 1024;
    const std::vector<Point> x(n, Point::symbol(0));
    std::vector<Bit> y(n);
    for (auto& b : y) b = bernoulli(rng, 0.5);
    io::PredictorSpec s;
    const auto blob = encode(x, y, s);
    EXPECT_GE(8.0 * static_cast<double>(blob.payload.size()), 960.0);
    EXPECT_EQ(decode(serialize(blob), x), y);
}

TEST(Codec, FuzzRoundTripAllTypes) {
    std::array<int, io::kPredictorTypeCount> seen{};
    for (std::size_t i = 0; i < 200; ++i) {
        const auto c = test::codec_case(i, 100, 600);
        QuantTrace te, td;
        const auto bytes = encode_bytes(c, &te);
        const auto y = decode(bytes, c.x, &td);
        ASSERT_EQ(y, c.y) << "case " << i << " type " << io::to_string(c.spec.type);
        ASSERT_EQ(te, td) << "case " << i;
        ++seen[static_cast<std::size_t>(c.spec.type)];
    }
    for (int k : seen) EXPECT_GT(k, 0);
}

TEST(Codec, OverheadWithinBudget) {
    for (std::size_t i = 0; i < 200; ++i) {
        const auto c = test::codec_case(i, 200, 600);
        const auto cl = codelength_vs_loss(c.x, c.y, c.spec);
        ASSERT_GE(cl.overhead(), 0.0) << "case " << i;
        ASSERT_LE(cl.overhead(), 32.0) << "case " << i;
    }
}

TEST(Codec, QuantizationPenalty) {
    double total = 0.0;
    std::size_t steps = 0;
    for (std::size_t i = 0; i < 200; ++i) {
        const auto c = test::codec_case(i, 300, 600);
        if (c.x.empty()) continue;
        AnyPredictor q = io::make_predictor(c.spec, c.x);
        double pen = 0.0;
        std::size_t central = 0;
        for (std::size_t t = 0; t < c.x.size(); ++t) {
            const Pmf2 p = q.predict(c.x[t]);
            if (p.p0 >= 1.0 / 64.0 && p.p0 <= 63.0 / 64.0) {
                pen += quantized_loss(quantize_p0(p), c.y[t]) + std::log2(p[c.y[t]]);
                ++central;
            }
            q.update(c.x[t], c.y[t]);
        }
        ASSERT_LE(pen, static_cast<double>(central) * kStepPenaltyCap + 1e-9) << "case " << i;
        total += pen;
        steps += central;
    }
    ASSERT_GT(steps, 10000u);
    EXPECT_LE(total, static_cast<double>(steps) * std::ldexp(1.0, -13));
}

TEST(Codec, EverySingleByteFlipIsDetected) {
    for (std::size_t i = 0; i < 30; ++i) {
        const auto c = test::codec_case(i, 400, 80);
        const auto bytes = encode_bytes(c);
        for (std::size_t pos = 0; pos < bytes.size(); ++pos) {
            for (std::uint8_t mask : {std::uint8_t{0x01}, std::uint8_t{0x80}, std::uint8_t{0xFF}}) {
                auto bad = bytes;
                bad[pos] ^= mask;
                EXPECT_TRUE(rejected(bad, c.x)) << "case " << i << " byte " << pos;
            }
        }
    }
}

TEST(Codec, WrongSideInformationNeverDecodesSilentlyWrong) {
    std::size_t tried = 0, caught = 0;
    for (std::size_t i = 0; i < 300; ++i) {
        const auto c = test::codec_case(i, 500, 200);
        if (c.x.size() < 16) continue;
        const auto bytes = encode_bytes(c);
        auto other = c.x;
        std::mt19937_64 rng(i);
        std::shuffle(other.begin(), other.end(), rng);
        const bool x_free = c.spec.type == io::PredictorType::KT || c.spec.type == io::PredictorType::Laplace;
        try {
            EXPECT_EQ(decode(bytes, other), c.y) << "case " << i;
        } catch (const ChecksumError&) {
            EXPECT_FALSE(x_free) << "case " << i;
            ++caught;
        }
        if (!x_free) ++tried;
    }
    ASSERT_GT(tried, 50u);
    EXPECT_GE(static_cast<double>(caught), 0.8 * static_cast<double>(tried));
}

TEST(Codec, LengthMismatchAndGarbage) {
    io::PredictorSpec s;
    const std::vector<Point> x(10, Point::symbol(0));
    const std::vector<Bit> y(10, 1);
    const auto bytes = serialize(encode(x, y, s));
    EXPECT_THROW(decode(bytes, std::vector<Point>(9, Point::symbol(0))), FormatError);
    EXPECT_THROW(parse(std::vector<std::uint8_t>{'L', 'S', 'P'}), FormatError);
    auto wrong_version = bytes;
    wrong_version[4] = 9;
    EXPECT_THROW(parse(wrong_version), FormatError);
    auto bad_id = bytes;
    bad_id[5] = 200;
    EXPECT_THROW(parse(bad_id), FormatError);
    auto short_blob = bytes;
    short_blob.resize(bytes.size() - 3);
    EXPECT_TRUE(rejected(short_blob, x));
    EXPECT_THROW(encode(x, std::vector<Bit>(9, 0), s), DomainError);
}

TEST(Codec, SerializeParseRoundTrip) {
    const auto c = test::codec_case(8, 600, 100);
    const auto blob = encode(c.x, c.y, c.spec);
    const auto back = parse(serialize(blob));
    EXPECT_EQ(back.predictor_id, blob.predictor_id);
    EXPECT_EQ(back.n, blob.n);
    EXPECT_EQ(back.seed, blob.seed);
    EXPECT_EQ(back.params, blob.params);
    EXPECT_EQ(back.payload, blob.payload);
    EXPECT_EQ(back.crc, blob.crc);
}

TEST(Codec, EpochCompressionWithinLooseBound) {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t n = 256;
        const Hypothesis h{Threshold{uniform01(rng), 1}, 0.1 + 0.3 * uniform01(rng), 0.6 + 0.3 * uniform01(rng)};
        const auto x = test::random_unit(rng, n);
        std::vector<Bit> y;
        double truth_bits = 0.0;
        for (const auto& xi : x) {
            const auto p = cond_pmf(h, xi);
            y.push_back(bernoulli(rng, p.p1));
            truth_bits += -std::log2(p[y.back()]);
        }
        io::PredictorSpec s;
        s.type = io::PredictorType::Epoch;
        s.cls = FunctionClass::thresholds();
        const auto blob = encode(x, y, s);
        EXPECT_LE(8.0 * static_cast<double>(blob.payload.size()), truth_bits + bounds::thm1(n, 1, 250) + 32.0);
        EXPECT_EQ(decode(serialize(blob), x), y);
    }
}
