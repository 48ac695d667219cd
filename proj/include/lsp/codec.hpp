#pragma once

// Adaptive binary range coder driven by a sequential predictor, plus the
// self-describing blob format.
//
// Blob layout, little-endian:
//   "LSPC" | version u8 | predictor id u8 | n u32 | seed u64
//   | param length u32 | param JSON | payload | crc32 u32
// The payload runs up to the trailing CRC. The CRC covers every preceding
// blob byte followed by the decoded y bits packed LSB-first, so a decoder
// fed the wrong side-information stream almost always fails the check.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "lsp/core.hpp"
#include "lsp/predictors.hpp"
#include "lsp/spec_io.hpp"

namespace lsp::codec {

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::uint32_t kProbBits = 16;
inline constexpr std::uint32_t kProbOne = 1u << kProbBits;

/// P(y = 0) on a 16-bit grid, kept inside [1, 65535].
inline std::uint32_t quantize_p0(const Pmf2& p) {
    const double v = std::nearbyint(p.p0 * static_cast<double>(kProbOne));
    if (!(v >= 1.0)) return 1;
    if (v >= static_cast<double>(kProbOne - 1)) return kProbOne - 1;
    return static_cast<std::uint32_t>(v);
}

/// -log2 of the quantized mass of y.
inline double quantized_loss(std::uint32_t q0, Bit y) {
    const std::uint32_t q = y ? kProbOne - q0 : q0;
    return static_cast<double>(kProbBits) - std::log2(static_cast<double>(q));
}

// ---------------------------------------------------------------------------
// Range coder: 40-bit window, carry propagated through a cached byte and a
// run of pending 0xFF bytes.

namespace detail {
inline constexpr std::uint64_t kTop = std::uint64_t{1} << 40;
inline constexpr std::uint64_t kBottom = std::uint64_t{1} << 32;
}  // namespace detail

class RangeEncoder {
public:
    void encode(Bit y, std::uint32_t q0) {
        const std::uint64_t bound = (range_ * q0) >> kProbBits;
        if (y) {
            low_ += bound;
            range_ -= bound;
        } else {
            range_ = bound;
        }
        while (range_ < detail::kBottom) {
            shift_low();
            range_ <<= 8;
        }
    }

    /// Emits the shortest byte-aligned code point inside the final interval.
    std::vector<std::uint8_t> finish() {
        unsigned k = 0;
        while ((detail::kTop >> (8 * k)) > range_) ++k;
        if (k > 0) {
            const std::uint64_t unit = detail::kTop >> (8 * k);
            low_ = (low_ + unit - 1) / unit * unit;
        }
        for (unsigned i = 0; i < k; ++i) shift_low();
        const auto carry = static_cast<std::uint8_t>(low_ >> 40);
        if (have_cache_) out_.push_back(static_cast<std::uint8_t>(cache_ + carry));
        for (; pending_ > 0; --pending_) out_.push_back(static_cast<std::uint8_t>(0xFF + carry));
        have_cache_ = false;
        return std::move(out_);
    }

private:
    void shift_low() {
        if ((low_ >> 32) != 0xFF) {
            const auto carry = static_cast<std::uint8_t>(low_ >> 40);
            if (have_cache_) out_.push_back(static_cast<std::uint8_t>(cache_ + carry));
            for (; pending_ > 0; --pending_) out_.push_back(static_cast<std::uint8_t>(0xFF + carry));
            cache_ = static_cast<std::uint8_t>(low_ >> 32);
            have_cache_ = true;
        } else {
            ++pending_;
        }
        low_ = (low_ << 8) & (detail::kTop - 1);
    }

    std::uint64_t low_ = 0;
    std::uint64_t range_ = detail::kTop;
    std::uint8_t cache_ = 0;
    bool have_cache_ = false;
    std::size_t pending_ = 0;
    std::vector<std::uint8_t> out_;
};

class RangeDecoder {
public:
    explicit RangeDecoder(std::span<const std::uint8_t> bytes) : in_(bytes) {
        for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next();
    }

    Bit decode(std::uint32_t q0) {
        const std::uint64_t bound = (range_ * q0) >> kProbBits;
        Bit y;
        if (code_ < bound) {
            range_ = bound;
            y = 0;
        } else {
            code_ -= bound;
            range_ -= bound;
            y = 1;
        }
        while (range_ < detail::kBottom) {
            code_ = (code_ << 8) | next();
            range_ <<= 8;
        }
        return y;
    }

private:
    std::uint64_t next() { return pos_ < in_.size() ? in_[pos_++] : 0; }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
    std::uint64_t code_ = 0;
    std::uint64_t range_ = detail::kTop;
};

// ---------------------------------------------------------------------------
// Blob

struct CodedBlob {
    std::uint8_t predictor_id = 0;
    std::uint32_t n = 0;
    std::uint64_t seed = 0;
    std::string params;  ///< compact JSON predictor spec, seed omitted
    std::vector<std::uint8_t> payload;
    std::uint32_t crc = 0;
};

namespace detail {

template <class T>
void put_le(std::vector<std::uint8_t>& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <class T>
T get_le(std::span<const std::uint8_t> in, std::size_t& pos) {
    if (in.size() - pos < sizeof(T)) throw FormatError("blob truncated");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(in[pos + i]) << (8 * i);
    pos += sizeof(T);
    return v;
}

inline std::vector<std::uint8_t> body_bytes(const CodedBlob& b) {
    std::vector<std::uint8_t> out{'L', 'S', 'P', 'C', kVersion, b.predictor_id};
    put_le<std::uint32_t>(out, b.n);
    put_le<std::uint64_t>(out, b.seed);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(b.params.size()));
    out.insert(out.end(), b.params.begin(), b.params.end());
    out.insert(out.end(), b.payload.begin(), b.payload.end());
    return out;
}

inline std::vector<std::uint8_t> pack_bits(std::span<const Bit> y) {
    std::vector<std::uint8_t> out((y.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < y.size(); ++i) out[i / 8] |= static_cast<std::uint8_t>(y[i] << (i % 8));
    return out;
}

inline std::uint32_t checksum(std::span<const std::uint8_t> body, std::span<const Bit> y) {
    uLong c = crc32(0L, Z_NULL, 0);
    c = crc32(c, body.data(), static_cast<uInt>(body.size()));
    // zlib resets to 0 when handed a null buffer
    const auto packed = pack_bits(y);
    if (!packed.empty()) c = crc32(c, packed.data(), static_cast<uInt>(packed.size()));
    return static_cast<std::uint32_t>(c);
}

inline io::PredictorSpec spec_from_blob(const CodedBlob& b) {
    io::Json j;
    try {
        j = io::Json::parse(b.params);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("blob parameter block is not valid JSON: ") + e.what());
    }
    io::PredictorSpec s;
    try {
        s = io::predictor_from_json(j);
    } catch (const DomainError& e) {
        throw FormatError(std::string("blob parameter block is not a predictor spec: ") + e.what());
    }
    if (static_cast<std::uint8_t>(s.type) != b.predictor_id)
        throw FormatError("blob predictor id does not match its parameter block");
    s.seed = b.seed;
    return s;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const CodedBlob& b) {
    auto out = detail::body_bytes(b);
    detail::put_le<std::uint32_t>(out, b.crc);
    return out;
}

inline CodedBlob parse(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 26 || std::memcmp(bytes.data(), "LSPC", 4) != 0) throw FormatError("not an LSPC blob");
    if (bytes[4] != kVersion) throw FormatError("unsupported blob version " + std::to_string(bytes[4]));
    CodedBlob b;
    b.predictor_id = bytes[5];
    if (b.predictor_id >= io::kPredictorTypeCount) throw FormatError("unknown predictor id");
    std::size_t pos = 6;
    b.n = detail::get_le<std::uint32_t>(bytes, pos);
    b.seed = detail::get_le<std::uint64_t>(bytes, pos);
    const auto plen = detail::get_le<std::uint32_t>(bytes, pos);
    if (bytes.size() - pos < std::size_t{plen} + 4) throw FormatError("blob truncated");
    b.params.assign(reinterpret_cast<const char*>(bytes.data() + pos), plen);
    pos += plen;
    b.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end() - 4);
    pos = bytes.size() - 4;
    b.crc = detail::get_le<std::uint32_t>(bytes, pos);
    return b;
}

// ---------------------------------------------------------------------------
// Encode / decode

/// Quantized P(y=0) per step, for cross-checking encoder and decoder.
using QuantTrace = std::vector<std::uint32_t>;

inline CodedBlob encode(std::span<const Point> x, std::span<const Bit> y, const io::PredictorSpec& spec,
                        QuantTrace* trace = nullptr) {
    if (x.size() != y.size()) throw DomainError("x and y must have equal length");
    if (x.size() > 0xFFFFFFFFu) throw DomainError("sequence too long for the blob format");
    CodedBlob b;
    b.predictor_id = static_cast<std::uint8_t>(spec.type);
    b.n = static_cast<std::uint32_t>(x.size());
    b.seed = spec.seed;
    b.params = io::to_json(spec, false).dump();
    RangeEncoder enc;
    if (x.empty()) {
        b.crc = detail::checksum(detail::body_bytes(b), y);
        return b;
    }
    AnyPredictor q = io::make_predictor(spec, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] > 1) throw DomainError("y must be binary");
        const std::uint32_t q0 = quantize_p0(q.predict(x[i]));
        if (trace) trace->push_back(q0);
        enc.encode(y[i], q0);
        q.update(x[i], y[i]);
    }
    b.payload = enc.finish();
    b.crc = detail::checksum(detail::body_bytes(b), y);
    return b;
}

/// Throws ChecksumError when the payload is damaged or `x` is not the
/// stream the blob was encoded with (the latter only with high probability).
inline std::vector<Bit> decode(const CodedBlob& b, std::span<const Point> x, QuantTrace* trace = nullptr) {
    if (x.size() != b.n) throw FormatError("side-information length differs from the blob's n");
    const auto spec = detail::spec_from_blob(b);
    std::vector<Bit> y;
    y.reserve(b.n);
    if (x.empty()) {
        if (!b.payload.empty() || detail::checksum(detail::body_bytes(b), y) != b.crc)
            throw ChecksumError("blob checksum mismatch");
        return y;
    }
    AnyPredictor q = io::make_predictor(spec, x);
    RangeDecoder dec(b.payload);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::uint32_t q0 = quantize_p0(q.predict(x[i]));
        if (trace) trace->push_back(q0);
        const Bit yi = dec.decode(q0);
        y.push_back(yi);
        q.update(x[i], yi);
    }
    if (detail::checksum(detail::body_bytes(b), y) != b.crc) throw ChecksumError("blob checksum mismatch");
    return y;
}

inline std::vector<Bit> decode(std::span<const std::uint8_t> bytes, std::span<const Point> x,
                               QuantTrace* trace = nullptr) {
    return decode(parse(bytes), x, trace);
}

struct Codelength {
    double payload_bits = 0.0;
    double ideal_bits = 0.0;  ///< sum of -log2 of the quantized masses
    double model_bits = 0.0;  ///< sum of -log2 of the unquantized masses
    double overhead() const { return payload_bits - ideal_bits; }
    double quantization_penalty() const { return ideal_bits - model_bits; }
};

inline Codelength codelength_vs_loss(std::span<const Point> x, std::span<const Bit> y, const io::PredictorSpec& spec) {
    if (x.size() != y.size()) throw DomainError("x and y must have equal length");
    Codelength c;
    if (x.empty()) return c;
    AnyPredictor q = io::make_predictor(spec, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Pmf2 p = q.predict(x[i]);
        c.ideal_bits += quantized_loss(quantize_p0(p), y[i]);
        c.model_bits += -std::log2(p[y[i]]);
        q.update(x[i], y[i]);
    }
    c.payload_bits = 8.0 * static_cast<double>(encode(x, y, spec).payload.size());
    return c;
}

}  // namespace lsp::codec
