#pragma once

// JSON forms of labelers, classes, hypotheses, samplers and predictor specs,
// plus construction of predictors from a spec. Parsing rejects unknown keys.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lsp/core.hpp"
#include "lsp/estimators.hpp"
#include "lsp/hypothesis.hpp"
#include "lsp/predictors.hpp"
#include "lsp/regret.hpp"

namespace lsp::io {

using Json = nlohmann::json;

namespace detail {

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw DomainError(where + " must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw DomainError("unknown key '" + k + "' in " + where);
    }
}

inline const Json& req(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw DomainError("missing key '" + std::string(key) + "' in " + where);
    return j.at(key);
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
    try {
        return req(j, key, where).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Labelers

inline Json to_json(const Labeler& g) {
    struct Visitor {
        Json operator()(const ConstantLabeler& c) const { return {{"type", "constant"}, {"value", c.value}}; }
        Json operator()(const FiniteTable& t) const { return {{"type", "table"}, {"bits", t.bits}}; }
        Json operator()(const Threshold& t) const {
            return {{"type", "threshold"}, {"t", t.t}, {"polarity", t.polarity}};
        }
        Json operator()(const Halfspace2D& h) const { return {{"type", "halfspace2d"}, {"angle", h.angle}}; }
        Json operator()(const Rectangle& r) const {
            return {{"type", "rectangle"},
                    {"a", std::vector<double>(r.lower.begin(), r.lower.begin() + static_cast<std::ptrdiff_t>(r.d))},
                    {"b", std::vector<double>(r.upper.begin(), r.upper.begin() + static_cast<std::ptrdiff_t>(r.d))}};
        }
    };
    return std::visit(Visitor{}, g);
}

inline Bit parse_bit(int v, const std::string& where) {
    if (v != 0 && v != 1) throw DomainError(where + " must be 0 or 1");
    return static_cast<Bit>(v);
}

inline Labeler labeler_from_json(const Json& j) {
    const std::string w = "labeler";
    const auto type = detail::get<std::string>(j, "type", w);
    if (type == "constant") {
        detail::check_keys(j, {"type", "value"}, w);
        return ConstantLabeler{parse_bit(detail::get<int>(j, "value", w), "constant value")};
    }
    if (type == "table") {
        detail::check_keys(j, {"type", "bits"}, w);
        FiniteTable t;
        for (int b : detail::get<std::vector<int>>(j, "bits", w)) t.bits.push_back(parse_bit(b, "table entry"));
        if (t.bits.empty()) throw DomainError("table labeler needs at least one entry");
        return t;
    }
    if (type == "threshold") {
        detail::check_keys(j, {"type", "t", "polarity"}, w);
        const double t = detail::get<double>(j, "t", w);
        if (!(t >= 0.0 && t <= 1.0)) throw DomainError("threshold must lie in [0,1]");
        return Threshold{t, parse_bit(detail::get_or<int>(j, "polarity", 1, w), "polarity")};
    }
    if (type == "halfspace2d") {
        detail::check_keys(j, {"type", "angle"}, w);
        return Halfspace2D{lsp::detail::wrap_angle(detail::get<double>(j, "angle", w))};
    }
    if (type == "rectangle") {
        detail::check_keys(j, {"type", "a", "b"}, w);
        return Rectangle(detail::get<std::vector<double>>(j, "a", w), detail::get<std::vector<double>>(j, "b", w));
    }
    throw DomainError("unknown labeler type '" + type + "'");
}

// ---------------------------------------------------------------------------
// Classes

inline Json to_json(const FunctionClass& c) {
    struct Visitor {
        std::size_t d;
        Json operator()(const FiniteClass& f) const {
            Json m = Json::array();
            for (const auto& g : f.members) m.push_back(to_json(g));
            return {{"kind", "finite"}, {"members", m}, {"vc_dim", d}};
        }
        Json operator()(const ThresholdClass&) const { return {{"kind", "thresholds"}}; }
        Json operator()(const Halfspace2DClass&) const { return {{"kind", "halfspaces2d"}}; }
        Json operator()(const RectangleClass& r) const { return {{"kind", "rectangles"}, {"d", r.d}}; }
    };
    return std::visit(Visitor{c.vc_dim()}, c.kind());
}

inline FunctionClass class_from_json(const Json& j) {
    const std::string w = "class";
    const auto kind = detail::get<std::string>(j, "kind", w);
    if (kind == "finite") {
        detail::check_keys(j, {"kind", "members", "vc_dim"}, w);
        std::vector<Labeler> members;
        const auto& arr = detail::req(j, "members", w);
        if (!arr.is_array()) throw DomainError("class members must be an array");
        for (const auto& m : arr) members.push_back(labeler_from_json(m));
        std::optional<std::size_t> d;
        if (j.contains("vc_dim")) d = detail::get<std::size_t>(j, "vc_dim", w);
        return FunctionClass::finite(std::move(members), d);
    }
    if (kind == "full_tables") {
        detail::check_keys(j, {"kind", "m"}, w);
        return FunctionClass::full_tables(detail::get<std::size_t>(j, "m", w));
    }
    if (kind == "constants") {
        detail::check_keys(j, {"kind"}, w);
        return FunctionClass::constants();
    }
    if (kind == "thresholds") {
        detail::check_keys(j, {"kind"}, w);
        return FunctionClass::thresholds();
    }
    if (kind == "halfspaces2d") {
        detail::check_keys(j, {"kind"}, w);
        return FunctionClass::halfspaces2d();
    }
    if (kind == "rectangles") {
        detail::check_keys(j, {"kind", "d"}, w);
        return FunctionClass::rectangles(detail::get<std::size_t>(j, "d", w));
    }
    throw DomainError("unknown class kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Hypotheses and samplers

inline Json to_json(const Hypothesis& h) {
    return {{"labeler", to_json(h.labeler)}, {"theta0", h.theta0}, {"theta1", h.theta1}};
}

inline Hypothesis hypothesis_from_json(const Json& j) {
    const std::string w = "hypothesis";
    detail::check_keys(j, {"labeler", "theta0", "theta1"}, w);
    Hypothesis h{labeler_from_json(detail::req(j, "labeler", w)), detail::get<double>(j, "theta0", w),
                 detail::get<double>(j, "theta1", w)};
    validate(h);
    return h;
}

inline Json to_json(const XSampler& s) {
    struct Visitor {
        Json operator()(const FiniteDist& f) const { return {{"kind", "finite"}, {"p", f.p}}; }
        Json operator()(const UniformInterval&) const { return {{"kind", "uniform_interval"}}; }
        Json operator()(const PowerInterval& p) const { return {{"kind", "power_interval"}, {"alpha", p.alpha}}; }
        Json operator()(const UniformCircle&) const { return {{"kind", "uniform_circle"}}; }
        Json operator()(const UniformBox& b) const { return {{"kind", "uniform_box"}, {"d", b.d}}; }
    };
    return std::visit(Visitor{}, s);
}

inline XSampler sampler_from_json(const Json& j) {
    const std::string w = "px";
    const auto kind = detail::get<std::string>(j, "kind", w);
    XSampler s;
    if (kind == "finite") {
        detail::check_keys(j, {"kind", "p"}, w);
        s = FiniteDist{detail::get<std::vector<double>>(j, "p", w)};
    } else if (kind == "uniform_interval") {
        detail::check_keys(j, {"kind"}, w);
        s = UniformInterval{};
    } else if (kind == "power_interval") {
        detail::check_keys(j, {"kind", "alpha"}, w);
        s = PowerInterval{detail::get<double>(j, "alpha", w)};
    } else if (kind == "uniform_circle") {
        detail::check_keys(j, {"kind"}, w);
        s = UniformCircle{};
    } else if (kind == "uniform_box") {
        detail::check_keys(j, {"kind", "d"}, w);
        s = UniformBox{detail::get<std::size_t>(j, "d", w)};
    } else {
        throw DomainError("unknown px kind '" + kind + "'");
    }
    validate(s);
    return s;
}

// ---------------------------------------------------------------------------
// Predictor specs

enum class PredictorType : std::uint8_t {
    Truth = 0,
    KT = 1,
    Laplace = 2,
    Blockwise = 3,
    FiniteMixture = 4,
    Noncausal = 5,
    Covering = 6,
    Epoch = 7,
    ParamMC = 8,
    ParamExact = 9,
};

inline constexpr std::uint8_t kPredictorTypeCount = 10;

inline const char* to_string(PredictorType t) {
    constexpr const char* names[] = {"truth",    "kt",    "laplace",  "blockwise",  "finite_mixture",
                                     "noncausal", "covering", "epoch", "param_mc", "param_exact"};
    return names[static_cast<std::uint8_t>(t)];
}

inline PredictorType predictor_type_from_string(const std::string& s) {
    for (std::uint8_t i = 0; i < kPredictorTypeCount; ++i)
        if (s == to_string(static_cast<PredictorType>(i))) return static_cast<PredictorType>(i);
    throw DomainError("unknown predictor type '" + s + "'");
}

struct PredictorSpec {
    PredictorType type = PredictorType::KT;
    std::optional<ThetaPrior> prior;       ///< empty: the type's default
    std::optional<FunctionClass> cls;      ///< mixtures
    std::optional<Labeler> labeler;        ///< blockwise g*
    std::optional<Hypothesis> hypothesis;  ///< truth (else the trial's truth)
    std::vector<double> px;                ///< covering
    std::size_t horizon = 0;               ///< covering; 0 means the sequence length
    std::size_t samples = 0;               ///< param_mc
    std::uint64_t seed = 0;                ///< param_mc

    /// Covering and epoch mixtures default to the uniform theta prior, the
    /// rest to Jeffreys.
    ThetaPrior effective_prior() const {
        if (prior) return *prior;
        return type == PredictorType::Covering || type == PredictorType::Epoch ? ThetaPrior::Uniform
                                                                                : ThetaPrior::Jeffreys;
    }

    const FunctionClass& need_class() const {
        if (!cls) throw DomainError(std::string("predictor '") + to_string(type) + "' needs a class");
        return *cls;
    }
};

/// `include_seed` is off inside codec headers, which carry the seed separately.
inline Json to_json(const PredictorSpec& s, bool include_seed = true) {
    Json j{{"type", to_string(s.type)}};
    if (s.prior) j["prior"] = to_string(*s.prior);
    if (s.cls) j["class"] = to_json(*s.cls);
    if (s.labeler) j["labeler"] = to_json(*s.labeler);
    if (s.hypothesis) j["hypothesis"] = to_json(*s.hypothesis);
    if (!s.px.empty()) j["px"] = s.px;
    if (s.horizon) j["horizon"] = s.horizon;
    if (s.samples) j["samples"] = s.samples;
    if (include_seed && s.type == PredictorType::ParamMC) j["seed"] = s.seed;
    return j;
}

inline PredictorSpec predictor_from_json(const Json& j) {
    const std::string w = "predictor";
    detail::check_keys(j, {"type", "prior", "class", "labeler", "hypothesis", "px", "horizon", "samples", "seed"}, w);
    PredictorSpec s;
    s.type = predictor_type_from_string(detail::get<std::string>(j, "type", w));
    if (j.contains("prior")) s.prior = theta_prior_from_string(detail::get<std::string>(j, "prior", w));
    if (j.contains("class")) s.cls = class_from_json(j.at("class"));
    if (j.contains("labeler")) s.labeler = labeler_from_json(j.at("labeler"));
    if (j.contains("hypothesis")) s.hypothesis = hypothesis_from_json(j.at("hypothesis"));
    s.px = detail::get_or<std::vector<double>>(j, "px", {}, w);
    s.horizon = detail::get_or<std::size_t>(j, "horizon", 0, w);
    s.samples = detail::get_or<std::size_t>(j, "samples", 0, w);
    s.seed = detail::get_or<std::uint64_t>(j, "seed", 0, w);
    switch (s.type) {
        case PredictorType::Blockwise:
            if (!s.labeler) throw DomainError("blockwise predictor needs a labeler");
            break;
        case PredictorType::FiniteMixture:
        case PredictorType::Covering:
            if (!s.need_class().is_finite()) throw DomainError("finite mixtures need a finite class");
            if (s.type == PredictorType::Covering && s.px.empty()) throw DomainError("covering mixture needs px");
            break;
        case PredictorType::Noncausal:
        case PredictorType::Epoch:
            s.need_class();
            break;
        case PredictorType::ParamMC:
            s.need_class();
            if (s.samples == 0) throw DomainError("param_mc needs samples > 0");
            break;
        case PredictorType::ParamExact:
            s.need_class();
            break;
        default:
            break;
    }
    return s;
}

/// Shorthand names accepted wherever a spec is expected: "kt", "laplace".
inline PredictorSpec predictor_from_text(const std::string& text) {
    if (!text.empty() && text.front() == '{') {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw DomainError(std::string("predictor spec is not valid JSON: ") + e.what());
        }
        return predictor_from_json(j);
    }
    return predictor_from_json(Json{{"type", text}});
}

/// Predictor for one sequence whose full side information is `x_all`.
/// `truth` is consulted only by the truth predictor without its own
/// hypothesis.
inline AnyPredictor make_predictor(const PredictorSpec& s, std::span<const Point> x_all,
                                   const Hypothesis* truth = nullptr) {
    const ThetaPrior prior = s.effective_prior();
    switch (s.type) {
        case PredictorType::Truth:
            if (s.hypothesis) return TruthPredictor(*s.hypothesis);
            if (!truth) throw DomainError("truth predictor needs a hypothesis");
            return TruthPredictor(*truth);
        case PredictorType::KT:
            return BlockwiseEstimator(ConstantLabeler{0}, s.prior.value_or(ThetaPrior::Jeffreys));
        case PredictorType::Laplace:
            return BlockwiseEstimator(ConstantLabeler{0}, s.prior.value_or(ThetaPrior::Uniform));
        case PredictorType::Blockwise:
            if (!s.labeler) throw DomainError("blockwise predictor needs a labeler");
            return BlockwiseEstimator(*s.labeler, prior);
        case PredictorType::FiniteMixture:
            return finite_mixture(s.need_class(), prior);
        case PredictorType::Noncausal:
            return noncausal_mixture(s.need_class(), x_all, prior);
        case PredictorType::Covering:
            return covering_mixture(s.need_class(), s.px, s.horizon ? s.horizon : std::max<std::size_t>(x_all.size(), 1),
                                    prior);
        case PredictorType::Epoch:
            return EpochPredictor(s.need_class(), prior);
        case PredictorType::ParamMC:
            return sampled_param_mixture(s.need_class(), s.samples, s.seed, prior);
        case PredictorType::ParamExact:
            return ExactCellMixture(s.need_class(), prior);
    }
    throw DomainError("unhandled predictor type");
}

/// Factory for repeated trials. Sequence-independent mixtures are built once.
inline PredictorFactory to_factory(const PredictorSpec& s) {
    PredictorFactory f;
    f.name = to_string(s.type);
    f.uses_truth = s.type == PredictorType::Truth && !s.hypothesis;
    const bool prebuilt = s.type == PredictorType::FiniteMixture || s.type == PredictorType::ParamMC ||
                          (s.type == PredictorType::Covering && s.horizon != 0);
    if (prebuilt) {
        f.make = [proto = make_predictor(s, {})](const TrialContext&) { return proto; };
    } else {
        f.make = [s](const TrialContext& c) { return make_predictor(s, c.x_all, &c.truth); };
    }
    return f;
}

}  // namespace lsp::io
