#pragma once

// Declarative experiment runner behind the `lsp run` command: config
// validation with defaults, execution of the six experiment kinds, and the
// CSV / JSON-lines sinks.

#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lsp/bounds.hpp"
#include "lsp/codec.hpp"
#include "lsp/lowerbound.hpp"
#include "lsp/regret.hpp"
#include "lsp/spec_io.hpp"

namespace lsp::experiment {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Kinds in listing order, with their keys (required first, then optional).
struct KindInfo {
    const char* name;
    std::vector<const char*> required;
    std::vector<const char*> optional;
    const char* summary;
};

inline const std::vector<KindInfo>& kinds() {
    static const std::vector<KindInfo> k = {
        {"regret_exact",
         {"predictor", "px", "hypothesis", "n"},
         {"name", "bound", "d", "class_size", "C", "delta"},
         "exact expected regret by enumeration over x^n and y^n (finite px)"},
        {"regret_mc",
         {"predictor", "px", "hypothesis", "n", "trials"},
         {"name", "bound", "d", "class_size", "C", "delta"},
         "Monte-Carlo regret, one row per trial plus mean and se rows"},
        {"worst_case",
         {"predictor", "n"},
         {"name", "labelers", "class", "px_list", "theta_step", "bound", "d", "class_size", "C", "delta"},
         "exact max of expected regret over labelers x theta grid x px list"},
        {"bounds_table", {"n", "d"}, {"name", "C", "delta"}, "every closed-form bound at each n"},
        {"ghat_error", {"m", "n", "trials"}, {"name"}, "midrange table estimator error rate with Wilson interval"},
        {"codec_bench",
         {"predictor", "px", "hypothesis", "n", "trials"},
         {"name"},
         "range-coder payload vs ideal codelength on simulated data"},
    };
    return k;
}

inline std::string list_experiments() {
    std::ostringstream os;
    for (const auto& k : kinds()) {
        os << k.name << ": " << k.summary << "\n  required:";
        for (const char* r : k.required) os << ' ' << r;
        os << "\n  optional:";
        for (const char* o : k.optional) os << ' ' << o;
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline const KindInfo& kind_info(const std::string& name) {
    for (const auto& k : kinds())
        if (name == k.name) return k;
    throw DomainError("unknown experiment kind '" + name + "'");
}

inline std::vector<std::size_t> n_list(const Json& j, const std::string& where) {
    std::vector<std::size_t> out;
    try {
        if (j.is_array())
            out = j.get<std::vector<std::size_t>>();
        else
            out.push_back(j.get<std::size_t>());
    } catch (const nlohmann::json::exception&) {
        throw DomainError("'n' in " + where + " must be a non-negative integer or a list of them");
    }
    if (out.empty()) throw DomainError("'n' in " + where + " must not be empty");
    return out;
}

inline const std::vector<const char*> kBoundNames = {"none",      "blockkt", "finite_class", "noncausal",
                                                     "known_px",  "halfspace", "rect",       "aux",
                                                     "thm1",      "thm1_hp", "thm2_lower",   "fano_floor"};

inline void fill_bound_defaults(Json& e, const io::PredictorSpec& spec, const std::string& where) {
    if (!e.contains("bound")) e["bound"] = "none";
    const auto b = e["bound"].get<std::string>();
    bool ok = false;
    for (const char* n : kBoundNames) ok = ok || b == n;
    if (!ok) throw DomainError("unknown bound '" + b + "' in " + where);
    if (!e.contains("d")) e["d"] = spec.cls ? spec.cls->vc_dim() : std::size_t{1};
    if (!e.contains("class_size"))
        e["class_size"] = spec.cls && spec.cls->is_finite() ? spec.cls->members().size() : std::size_t{1};
    if (!e.contains("C")) e["C"] = bounds::kDefaultC;
    if (!e.contains("delta")) e["delta"] = 0.1;
}

inline double bound_value(const Json& e, std::size_t n) {
    const auto name = e.at("bound").get<std::string>();
    const auto d = e.at("d").get<std::size_t>();
    const auto C = e.at("C").get<double>();
    if (name == "blockkt") return bounds::blockkt(n);
    if (name == "finite_class") return bounds::finite_class(n, e.at("class_size").get<std::size_t>());
    if (name == "noncausal") return bounds::noncausal(n, d);
    if (name == "known_px") return bounds::known_px(n, d);
    if (name == "halfspace") return bounds::halfspace(n, d);
    if (name == "rect") return bounds::rect(n, d);
    if (name == "aux") return bounds::aux(n, d, C);
    if (name == "thm1") return bounds::thm1(n, d, C);
    if (name == "thm1_hp") return bounds::thm1_hp(n, d, C, e.at("delta").get<double>());
    if (name == "thm2_lower") return bounds::thm2_lower(n, d);
    if (name == "fano_floor") return bounds::fano_floor(n, d);
    return std::nan("");
}

inline std::vector<double> finite_px(const XSampler& s, const std::string& where) {
    const auto* f = std::get_if<FiniteDist>(&s);
    if (!f) throw DomainError(where + " needs a finite px");
    return f->p;
}

}  // namespace detail

/// Parses config text. A file whose first line is "# config: {...}", as
/// written at the top of every output file, is accepted as well.
inline Json parse_config_text(const std::string& text) {
    std::string body = text;
    const std::string tag = "# config: ";
    if (body.rfind(tag, 0) == 0) body = body.substr(tag.size(), body.find('\n') - tag.size());
    try {
        return Json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError(std::string("config is not valid JSON: ") + e.what());
    }
}

/// Validates a config and returns it with every default filled in.
inline Json effective_config(Json cfg) {
    io::detail::check_keys(cfg, {"schema_version", "seed", "format", "threads", "output", "experiments"}, "config");
    if (!cfg.contains("schema_version")) throw DomainError("config needs schema_version");
    if (cfg["schema_version"] != kSchemaVersion)
        throw DomainError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    if (!cfg.contains("seed")) cfg["seed"] = std::uint64_t{1};
    if (!cfg["seed"].is_number_unsigned()) throw DomainError("seed must be a non-negative integer");
    if (!cfg.contains("format")) cfg["format"] = "csv";
    if (cfg["format"] != "csv" && cfg["format"] != "jsonl") throw DomainError("format must be csv or jsonl");
    if (cfg.contains("threads") && !(cfg["threads"].is_number_unsigned() && cfg["threads"].get<std::size_t>() > 0))
        throw DomainError("threads must be a positive integer");
    if (cfg.contains("output") && !cfg["output"].is_string()) throw DomainError("output must be a path string");
    if (!cfg.contains("experiments") || !cfg["experiments"].is_array() || cfg["experiments"].empty())
        throw DomainError("config needs a non-empty experiments array");

    std::size_t idx = 0;
    for (auto& e : cfg["experiments"]) {
        const std::string where = "experiment #" + std::to_string(idx);
        const auto kind = io::detail::get<std::string>(e, "kind", where);
        const auto& info = detail::kind_info(kind);
        {
            std::vector<const char*> allowed{"kind"};
            allowed.insert(allowed.end(), info.required.begin(), info.required.end());
            allowed.insert(allowed.end(), info.optional.begin(), info.optional.end());
            for (const auto& [k, v] : e.items()) {
                bool ok = false;
                for (const char* a : allowed) ok = ok || k == a;
                if (!ok) throw DomainError("unknown key '" + k + "' in " + where + " (" + kind + ")");
            }
            for (const char* r : info.required)
                if (!e.contains(r)) throw DomainError("missing key '" + std::string(r) + "' in " + where);
        }
        if (!e.contains("name")) e["name"] = kind + "_" + std::to_string(idx);
        detail::n_list(e["n"], where);
        if (e.contains("trials")) {
            if (!e["trials"].is_number_unsigned()) throw DomainError("trials must be a positive integer");
            const auto t = e["trials"].get<std::size_t>();
            if (kind == "regret_mc" && t < 2) throw DomainError("regret_mc needs trials >= 2");
            if (kind == "ghat_error" && t < 100) throw DomainError("ghat_error needs trials >= 100");
            if (t == 0) throw DomainError("trials must be positive");
        }

        std::optional<io::PredictorSpec> spec;
        if (e.contains("predictor")) {
            spec = io::predictor_from_json(e["predictor"]);
            e["predictor"] = io::to_json(*spec);
        }
        std::optional<XSampler> px;
        if (e.contains("px")) {
            px = io::sampler_from_json(e["px"]);
            e["px"] = io::to_json(*px);
        }
        if (e.contains("hypothesis")) e["hypothesis"] = io::to_json(io::hypothesis_from_json(e["hypothesis"]));

        if (kind == "regret_exact" || kind == "regret_mc" || kind == "worst_case")
            detail::fill_bound_defaults(e, *spec, where);
        if (kind == "regret_exact") detail::finite_px(*px, where);
        if (kind == "worst_case") {
            if (e.contains("labelers") == e.contains("class"))
                throw DomainError(where + " needs exactly one of 'labelers' or 'class'");
            std::size_t m = 0;
            if (e.contains("class")) {
                auto cls = io::class_from_json(e["class"]);
                if (!cls.is_finite()) throw DomainError(where + ": worst_case needs a finite class");
                e["class"] = io::to_json(cls);
                for (const auto& g : cls.members())
                    if (const auto* t = std::get_if<FiniteTable>(&g)) m = std::max(m, t->alphabet());
            } else {
                if (!e["labelers"].is_array() || e["labelers"].empty())
                    throw DomainError(where + ": labelers must be a non-empty array");
                for (auto& g : e["labelers"]) {
                    const auto lab = io::labeler_from_json(g);
                    if (const auto* t = std::get_if<FiniteTable>(&lab)) m = std::max(m, t->alphabet());
                    g = io::to_json(lab);
                }
            }
            if (!e.contains("theta_step")) e["theta_step"] = 0.05;
            theta_grid(e["theta_step"].get<double>());
            if (!e.contains("px_list")) {
                if (m == 0) throw DomainError(where + ": px_list is required when no table labeler fixes m");
                e["px_list"] = default_px_list(m);
            }
            for (const auto& p : e["px_list"]) validate(XSampler{FiniteDist{p.get<std::vector<double>>()}});
        }
        if (kind == "bounds_table") {
            if (!e.contains("C")) e["C"] = bounds::kDefaultC;
            if (!e.contains("delta")) e["delta"] = 0.1;
            const auto d = io::detail::get<std::size_t>(e, "d", where);
            if (d == 0 || d > 62) throw DomainError(where + ": d must lie in 1..62");
            for (auto n : detail::n_list(e["n"], where))
                if (n == 0) throw DomainError(where + ": n must be positive");
        }
        if (kind == "ghat_error") {
            const auto m = io::detail::get<std::size_t>(e, "m", where);
            if (m == 0 || m > 62) throw DomainError(where + ": m must lie in 1..62");
        }
        ++idx;
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Execution

struct Table {
    std::string experiment;
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;
    std::string summary;
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t experiment_seed(std::uint64_t base, std::size_t index) { return mix_seed(base + index); }

inline std::vector<Point> draw_x(const XSampler& s, std::size_t n, std::mt19937_64& rng) {
    std::vector<Point> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back(sample_x(s, rng));
    return x;
}

}  // namespace detail

inline Table run_experiment(const Json& e, std::uint64_t seed, std::size_t threads) {
    const auto kind = e.at("kind").get<std::string>();
    const auto name = e.at("name").get<std::string>();
    const auto ns = detail::n_list(e.at("n"), name);
    Table t;
    t.experiment = name;
    std::ostringstream summary;
    summary << name << " (" << kind << "):";

    const std::vector<std::string> regret_cols{"experiment", "n",          "trial_or_exact", "regret_bits",
                                               "bound_name", "bound_bits", "seed"};
    auto bound_cell = [&](std::size_t n) -> Json {
        const double v = detail::bound_value(e, n);
        return std::isnan(v) ? Json() : Json(v);
    };

    if (kind == "regret_exact") {
        t.columns = regret_cols;
        const auto spec = io::predictor_from_json(e.at("predictor"));
        const auto px = detail::finite_px(io::sampler_from_json(e.at("px")), name);
        const auto h = io::hypothesis_from_json(e.at("hypothesis"));
        const auto factory = io::to_factory(spec);
        for (auto n : ns) {
            const double r = expected_regret_exact(px, h, factory, n);
            t.rows.push_back({name, n, "exact", r, e.at("bound"), bound_cell(n), Json()});
            summary << " n=" << n << " regret=" << detail::fmt_double(r);
        }
    } else if (kind == "regret_mc") {
        t.columns = regret_cols;
        const auto spec = io::predictor_from_json(e.at("predictor"));
        const NatureConfig base{io::sampler_from_json(e.at("px")), io::hypothesis_from_json(e.at("hypothesis")), 0};
        const auto factory = io::to_factory(spec);
        const auto trials = e.at("trials").get<std::size_t>();
        for (std::size_t ni = 0; ni < ns.size(); ++ni) {
            NatureConfig nature = base;
            nature.n = ns[ni];
            const std::uint64_t s0 = mix_seed(seed + ni);
            const auto rs = trial_regrets(nature, factory, trials, s0, threads);
            for (std::size_t i = 0; i < rs.size(); ++i)
                t.rows.push_back({name, nature.n, i, rs[i].regret, e.at("bound"), bound_cell(nature.n), s0 + i});
            const auto est = summarize(rs);
            t.rows.push_back({name, nature.n, "mean", est.mean, e.at("bound"), bound_cell(nature.n), s0});
            t.rows.push_back({name, nature.n, "se", est.se, e.at("bound"), bound_cell(nature.n), s0});
            summary << " n=" << nature.n << " mean=" << detail::fmt_double(est.mean)
                    << " se=" << detail::fmt_double(est.se) << " clamps=" << est.clamp_events;
        }
    } else if (kind == "worst_case") {
        t.columns = regret_cols;
        const auto spec = io::predictor_from_json(e.at("predictor"));
        std::vector<Labeler> labelers;
        if (e.contains("class"))
            labelers = io::class_from_json(e.at("class")).members();
        else
            for (const auto& g : e.at("labelers")) labelers.push_back(io::labeler_from_json(g));
        const auto px_list = e.at("px_list").get<std::vector<std::vector<double>>>();
        const auto factory = io::to_factory(spec);
        for (auto n : ns) {
            const auto wc = worst_case_regret_exact(factory, labelers, e.at("theta_step").get<double>(), px_list, n);
            t.rows.push_back({name, n, "worst", wc.regret, e.at("bound"), bound_cell(n), Json()});
            summary << " n=" << n << " worst=" << detail::fmt_double(wc.regret) << " at theta=("
                    << wc.argmax.theta0 << "," << wc.argmax.theta1 << ") px#" << wc.px_index;
        }
    } else if (kind == "bounds_table") {
        t.columns = {"experiment", "n", "d", "C", "delta", "bound_name", "bound_bits"};
        const auto d = e.at("d").get<std::size_t>();
        const auto C = e.at("C").get<double>();
        const auto delta = e.at("delta").get<double>();
        for (auto n : ns)
            for (const auto& b : bounds::table(n, d, C, delta))
                t.rows.push_back({name, n, d, C, delta, b.name, b.bits});
        summary << ' ' << t.rows.size() << " rows";
    } else if (kind == "ghat_error") {
        t.columns = {"experiment", "m", "n", "trials", "error_rate", "ci_lo", "ci_hi", "bound", "vacuous", "seed"};
        const auto m = e.at("m").get<std::size_t>();
        const auto trials = e.at("trials").get<std::size_t>();
        for (std::size_t ni = 0; ni < ns.size(); ++ni) {
            const std::uint64_t s0 = mix_seed(seed + ni);
            const auto r = lowerbound::ghat_error_experiment(m, ns[ni], trials, s0, threads);
            t.rows.push_back({name, m, r.n, trials, r.rate, r.ci.lo, r.ci.hi, r.bound, r.vacuous, s0});
            summary << " n=" << r.n << " error=" << detail::fmt_double(r.rate) << " bound="
                    << detail::fmt_double(r.bound) << (r.vacuous ? " (vacuous)" : "");
        }
    } else if (kind == "codec_bench") {
        t.columns = {"experiment", "n",        "trial",         "payload_bits", "ideal_bits",
                     "model_bits", "overhead_bits", "roundtrip_ok", "seed"};
        const auto spec = io::predictor_from_json(e.at("predictor"));
        const auto sampler = io::sampler_from_json(e.at("px"));
        const auto h = io::hypothesis_from_json(e.at("hypothesis"));
        const auto trials = e.at("trials").get<std::size_t>();
        struct Row {
            codec::Codelength c;
            bool ok;
        };
        for (std::size_t ni = 0; ni < ns.size(); ++ni) {
            const std::size_t n = ns[ni];
            const std::uint64_t s0 = mix_seed(seed + ni);
            const auto rows = parallel_map<Row>(
                trials,
                [&](std::size_t i) {
                    std::mt19937_64 rng(s0 + i);
                    const auto x = detail::draw_x(sampler, n, rng);
                    std::vector<Bit> y;
                    for (const auto& xi : x) y.push_back(bernoulli(rng, cond_pmf(h, xi).p1));
                    const auto blob = codec::encode(x, y, spec);
                    const bool ok = codec::decode(codec::serialize(blob), x) == y;
                    return Row{codec::codelength_vs_loss(x, y, spec), ok};
                },
                threads);
            double worst = 0.0;
            std::size_t bad = 0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto& c = rows[i].c;
                t.rows.push_back({name, n, i, c.payload_bits, c.ideal_bits, c.model_bits, c.overhead(), rows[i].ok,
                                  s0 + i});
                worst = std::max(worst, c.overhead());
                bad += !rows[i].ok;
            }
            summary << " n=" << n << " max_overhead=" << detail::fmt_double(worst) << " roundtrip_failures=" << bad;
        }
    }
    t.summary = summary.str();
    return t;
}

/// Runs every experiment in an effective config. Experiment k draws its seeds
/// from mix_seed(seed + k).
inline std::vector<Table> run(const Json& cfg, std::size_t threads) {
    std::vector<Table> out;
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    std::size_t k = 0;
    for (const auto& e : cfg.at("experiments")) out.push_back(run_experiment(e, detail::experiment_seed(seed, k++), threads));
    return out;
}

/// The config as echoed into outputs: runtime-only keys (threads, output)
/// are dropped since they cannot change results.
inline Json echo_config(Json cfg) {
    cfg.erase("threads");
    cfg.erase("output");
    return cfg;
}

inline std::string csv_cell(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return detail::fmt_double(v.get<double>());
    return v.dump();
}

inline void write_csv(std::ostream& os, const Json& cfg, const std::vector<Table>& tables) {
    os << "# config: " << echo_config(cfg).dump() << '\n';
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (i > 0) os << '\n';
        const auto& t = tables[i];
        for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
        os << '\n';
        for (const auto& r : t.rows) {
            for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << csv_cell(r[c]);
            os << '\n';
        }
    }
}

inline void write_jsonl(std::ostream& os, const Json& cfg, const std::vector<Table>& tables) {
    os << "# config: " << echo_config(cfg).dump() << '\n';
    for (const auto& t : tables)
        for (const auto& r : t.rows) {
            Json j = Json::object();
            for (std::size_t c = 0; c < t.columns.size(); ++c) j[t.columns[c]] = r[c];
            os << j.dump() << '\n';
        }
}

}  // namespace lsp::experiment
