// lsp: experiment runner, bound tables and the side-information codec.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "lsp/bounds.hpp"
#include "lsp/codec.hpp"
#include "lsp/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kRuntime = 3;

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("lsp");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("LSP_LOG");
    const std::string level = env ? env : "info";
    if (level == "error")
        spdlog::set_level(spdlog::level::err);
    else if (level == "debug")
        spdlog::set_level(spdlog::level::debug);
    else
        spdlog::set_level(spdlog::level::info);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

/// One point per non-empty line, coordinates separated by whitespace.
std::vector<lsp::Point> read_points(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<lsp::Point> pts;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<double> c;
        double v;
        while (ls >> v) c.push_back(v);
        if (!ls.eof()) throw ValidationError("bad number in " + path + ": " + line);
        if (!c.empty()) pts.emplace_back(std::span<const double>(c));
    }
    return pts;
}

/// '0' / '1' characters; anything else except whitespace is an error.
std::vector<lsp::Bit> read_bits(const std::string& path) {
    std::vector<lsp::Bit> y;
    for (char ch : read_file(path)) {
        if (ch == '0' || ch == '1')
            y.push_back(static_cast<lsp::Bit>(ch - '0'));
        else if (!std::isspace(static_cast<unsigned char>(ch)))
            throw ValidationError("y file must contain only 0 and 1");
    }
    return y;
}

int cmd_run(const std::string& config_path, const std::string& out_path, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> threads) {
    auto cfg = lsp::experiment::parse_config_text(read_file(config_path));
    if (seed) cfg["seed"] = *seed;
    cfg = lsp::experiment::effective_config(std::move(cfg));
    std::size_t nthreads = lsp::default_threads();
    if (cfg.contains("threads")) nthreads = cfg["threads"].get<std::size_t>();
    if (threads) nthreads = *threads;
    std::string out = out_path;
    if (out.empty() && cfg.contains("output")) out = cfg["output"].get<std::string>();
    spdlog::debug("effective config: {}", cfg.dump());
    spdlog::info("running {} experiment(s) on {} thread(s)", cfg["experiments"].size(), nthreads);

    const auto tables = lsp::experiment::run(cfg, nthreads);
    std::ostringstream os;
    if (cfg["format"] == "jsonl")
        lsp::experiment::write_jsonl(os, cfg, tables);
    else
        lsp::experiment::write_csv(os, cfg, tables);
    if (out.empty())
        std::cout << os.str();
    else
        write_file(out, os.str());
    for (const auto& t : tables) std::cerr << t.summary << '\n';
    return kOk;
}

int cmd_bounds(const std::vector<std::size_t>& ns, std::size_t d, double C, double delta) {
    std::cout << "n,d,C,delta,bound_name,bound_bits\n";
    for (auto n : ns)
        for (const auto& b : lsp::bounds::table(n, d, C, delta))
            std::cout << n << ',' << d << ',' << lsp::experiment::csv_cell(C) << ','
                      << lsp::experiment::csv_cell(delta) << ',' << b.name << ','
                      << lsp::experiment::csv_cell(b.bits) << '\n';
    return kOk;
}

int cmd_encode(const std::string& x_path, const std::string& y_path, const std::string& predictor,
               const std::string& blob_path, bool cross_check) {
    const auto x = read_points(x_path);
    const auto y = read_bits(y_path);
    const auto spec = lsp::io::predictor_from_text(predictor);
    lsp::codec::QuantTrace enc_trace;
    const auto blob = lsp::codec::encode(x, y, spec, cross_check ? &enc_trace : nullptr);
    const auto bytes = lsp::codec::serialize(blob);
    if (cross_check) {
        lsp::codec::QuantTrace dec_trace;
        lsp::codec::decode(bytes, x, &dec_trace);
        if (dec_trace != enc_trace) throw std::runtime_error("encoder and decoder quantized pmfs diverged");
        spdlog::debug("cross-check passed on {} symbols", enc_trace.size());
    }
    write_file(blob_path, std::string(bytes.begin(), bytes.end()));
    spdlog::info("encoded n={} into {} payload bytes ({} blob bytes)", y.size(), blob.payload.size(), bytes.size());
    return kOk;
}

int cmd_decode(const std::string& x_path, const std::string& blob_path, const std::string& y_path) {
    const auto x = read_points(x_path);
    const auto raw = read_file(blob_path);
    const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
    const auto y = lsp::codec::decode(bytes, x);
    std::string s;
    for (auto b : y) s.push_back(static_cast<char>('0' + b));
    s.push_back('\n');
    if (y_path.empty())
        std::cout << s;
    else
        write_file(y_path, s);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Sequential probability assignment with side information"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run the experiments in a JSON config");
    std::string config_path, out_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    run->add_option("--config", config_path, "Config file")->required();
    run->add_option("--out", out_path, "Output file (default: config 'output', else stdout)");
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    auto* list = app.add_subcommand("list-experiments", "List experiment kinds and their fields");

    auto* bnd = app.add_subcommand("bounds", "Evaluate every closed-form bound");
    std::vector<std::size_t> ns;
    std::size_t d = 1;
    double C = lsp::bounds::kDefaultC, delta = 0.1;
    bnd->add_option("--n", ns, "Comma-separated horizons")->required()->delimiter(',');
    bnd->add_option("--d", d, "Dimension / VC dimension")->required();
    bnd->add_option("--C", C, "Absolute constant");
    bnd->add_option("--delta", delta, "Failure probability for thm1_hp");

    auto* codec = app.add_subcommand("codec", "Compress y given side information x");
    codec->require_subcommand(1);
    std::string x_path, y_path, predictor = "kt", blob_path;
    bool cross_check = false;
    auto* enc = codec->add_subcommand("encode", "Encode y into a blob");
    enc->add_option("--x", x_path, "Side information, one point per line")->required();
    enc->add_option("--y", y_path, "Bits as 0/1 characters")->required();
    enc->add_option("--predictor", predictor, "Predictor name or JSON spec");
    enc->add_option("--blob", blob_path, "Output blob")->required();
    enc->add_flag("--cross-check", cross_check, "Decode again and compare quantized pmfs step by step");
    auto* dec = codec->add_subcommand("decode", "Decode a blob back into y");
    dec->add_option("--x", x_path, "Side information, one point per line")->required();
    dec->add_option("--blob", blob_path, "Input blob")->required();
    dec->add_option("--y", y_path, "Output bits (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        if (*run) return cmd_run(config_path, out_path, seed, threads);
        if (*list) {
            std::cout << lsp::experiment::list_experiments();
            return kOk;
        }
        if (*bnd) return cmd_bounds(ns, d, C, delta);
        if (*enc) return cmd_encode(x_path, y_path, predictor, blob_path, cross_check);
        if (*dec) return cmd_decode(x_path, blob_path, y_path);
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return kValidation;
    } catch (const lsp::DomainError& e) {
        spdlog::error("invalid input: {}", e.what());
        return kValidation;
    } catch (const lsp::BudgetExceeded& e) {
        spdlog::error("budget exceeded: {}", e.what());
        return kRuntime;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kRuntime;
    }
    return kOk;
}
