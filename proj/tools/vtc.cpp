// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Batch front end: traces -> scores -> selections -> reports.
//
//   vtc sim    --seed 7 --tokens 32 --planted 8 --gamma 4 --out traces/
//   vtc score  --trace traces/enc.vtct --k 3 --ensemble avg --out scores.json
//   vtc prune  --scores scores.json --keep 8 --out kept.json
//   vtc diag   --enc traces/enc.vtct --dec traces/dec.vtct --budgets 8,16
//              --out-csv diag.csv --out-json diag.json
//   vtc cost   --d 4096 --ffn 11008 --layers 32 --text 64 --full 576 --keep 128
//
// Exit codes: 0 success, 1 usage error, 2 data/format error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vtc/cost.hpp"
#include "vtc/diagnostics.hpp"
#include "vtc/errors.hpp"
#include "vtc/scoring.hpp"
#include "vtc/selection.hpp"
#include "vtc/simulator.hpp"
#include "vtc/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw vtc::IoError("cannot write " + path.string());
    }
}

nlohmann::json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw vtc::IoError("cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw vtc::FormatError(path.string() + ": invalid JSON: " + e.what());
    }
}

std::vector<std::uint32_t> parse_budget_list(const std::string& text) {
    std::vector<std::uint32_t> budgets;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        try {
            const unsigned long v = std::stoul(item);
            if (v == 0 || v > 0xffffffffUL) {
                throw std::out_of_range(item);
            }
            budgets.push_back(static_cast<std::uint32_t>(v));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--budgets", "expected comma-separated positive integers");
        }
        pos = comma + 1;
    }
    return budgets;
}

std::pair<std::uint32_t, std::uint32_t> parse_k_range(const std::string& text) {
    const std::size_t dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const std::uint32_t k = static_cast<std::uint32_t>(std::stoul(text));
            return {k, k};
        }
        const std::uint32_t lo = static_cast<std::uint32_t>(std::stoul(text.substr(0, dots)));
        const std::uint32_t hi = static_cast<std::uint32_t>(std::stoul(text.substr(dots + 2)));
        if (lo == 0 || hi < lo) {
            throw std::out_of_range(text);
        }
        return {lo, hi};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--k-sweep", "expected A..B with 1 <= A <= B");
    }
}

struct ScoreArgs {
    std::string trace_path;
    std::uint32_t k = 3;
    std::string ensemble = "avg";
    std::string out_path;
};

int run_score(const ScoreArgs& args) {
    const vtc::AttentionTrace trace = vtc::read_trace_file(args.trace_path);
    const vtc::ImportanceScore score = vtc::encoder_ensemble_importance(
        trace, args.k, vtc::ensemble_from_string(args.ensemble));
    write_text_file(args.out_path, vtc::to_json(score).dump(2) + "\n");
    return kExitOk;
}

struct PruneArgs {
    std::string scores_path;
    std::uint32_t keep = 0;
    std::uint32_t after_layer = 0;
    std::string out_path;
};

int run_prune(const PruneArgs& args) {
    const vtc::ImportanceScore score =
        vtc::importance_from_json(load_json_file(args.scores_path));
    const vtc::PruneLocation location = args.after_layer > 0
                                            ? vtc::PruneLocation::after_llm_layer(args.after_layer)
                                            : vtc::PruneLocation::before_llm();
    const vtc::PrunePlan plan = vtc::make_prune_plan(score, args.keep, location);
    write_text_file(args.out_path, vtc::to_json(plan).dump(2) + "\n");
    return kExitOk;
}

struct DiagArgs {
    std::string enc_path;
    std::string dec_path;
    std::string budgets = "64,128";
    std::uint32_t k = 3;
    std::string ensemble = "avg";
    std::string k_sweep;  // "A..B", empty = no sweep
    std::string out_csv;
    std::string out_json;
};

int run_diag(const DiagArgs& args) {
    const std::vector<std::uint32_t> budgets = parse_budget_list(args.budgets);
    const vtc::AttentionTrace enc = vtc::read_trace_file(args.enc_path);
    const vtc::AttentionTrace dec = vtc::read_trace_file(args.dec_path);
    const vtc::EnsembleFn fn = vtc::ensemble_from_string(args.ensemble);

    std::ofstream csv(args.out_csv, std::ios::binary | std::ios::trunc);
    if (!csv) {
        throw vtc::IoError("cannot write " + args.out_csv);
    }
    if (args.k_sweep.empty()) {
        const vtc::ConsistencyReport report =
            vtc::consistency_report(enc, dec, budgets, args.k, fn);
        vtc::write_report_csv(csv, report);
        write_text_file(args.out_json, vtc::to_json(report).dump(2) + "\n");
    } else {
        const auto [k_lo, k_hi] = parse_k_range(args.k_sweep);
        const std::vector<vtc::KSweepPoint> sweep =
            vtc::k_sweep(enc, dec, budgets, k_lo, k_hi, fn);
        vtc::write_sweep_csv(csv, sweep);
        write_text_file(args.out_json, vtc::sweep_to_json(sweep).dump(2) + "\n");
    }
    if (!csv) {
        throw vtc::IoError("cannot write " + args.out_csv);
    }
    return kExitOk;
}

struct SimArgs {
    vtc::SimConfig config{.seed = 0,
                          .n_visual = 32,
                          .width = 32,
                          .heads = 4,
                          .enc_layers = 6,
                          .dec_layers = 4,
                          .output_tokens = 4,
                          .planted = 8,
                          .gamma = 4.0};
    std::string out_dir;
};

int run_sim(const SimArgs& args) {
    try {
        args.config.validate();
    } catch (const vtc::InvalidConfig& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    std::filesystem::create_directories(args.out_dir);
    const vtc::SimOutput out = vtc::simulate(args.config);
    const std::filesystem::path dir(args.out_dir);
    vtc::write_trace_file(out.encoder_trace, dir / "enc.vtct");
    vtc::write_trace_file(out.decoder_trace, dir / "dec.vtct");
    write_text_file(dir / "sidecar.json",
                    vtc::sidecar_json(args.config, out.planted).dump(2) + "\n");
    return kExitOk;
}

struct CostArgs {
    vtc::ModelDims dims;
};

int run_cost(const CostArgs& args) {
    try {
        std::cout << vtc::cost_report_json(args.dims).dump(2) << "\n";
    } catch (const vtc::InvalidConfig& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"visual token compression toolkit"};
    app.require_subcommand(1);

    ScoreArgs score_args;
    CLI::App* score = app.add_subcommand(
        "score", "ensemble [CLS] importance scores from an encoder trace");
    score->add_option("--trace", score_args.trace_path, "encoder .vtct file")->required();
    score->add_option("--k", score_args.k, "ensemble depth (layers ending at penultimate)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    score->add_option("--ensemble", score_args.ensemble, "aggregation: avg|max|min")
        ->check(CLI::IsMember({"avg", "max", "min"}))
        ->capture_default_str();
    score->add_option("--out", score_args.out_path, "output score JSON")->required();

    PruneArgs prune_args;
    CLI::App* prune = app.add_subcommand("prune", "select the top-U tokens from a score file");
    prune->add_option("--scores", prune_args.scores_path, "score JSON from `score`")->required();
    prune->add_option("--keep", prune_args.keep, "budget U (tokens to keep)")
        ->check(CLI::PositiveNumber)
        ->required();
    prune->add_option("--after-layer", prune_args.after_layer,
                      "defer the drop until after this LLM layer (>= 1)")
        ->check(CLI::PositiveNumber);
    prune->add_option("--out", prune_args.out_path, "output selection JSON")->required();

    DiagArgs diag_args;
    CLI::App* diag = app.add_subcommand(
        "diag", "encoder vs decoder importance consistency (overlap + rank correlation)");
    diag->add_option("--enc", diag_args.enc_path, "encoder .vtct file")->required();
    diag->add_option("--dec", diag_args.dec_path, "decoder .vtct file")->required();
    diag->add_option("--budgets", diag_args.budgets, "comma-separated kept-token budgets")
        ->check([](const std::string& s) -> std::string {
            try {
                parse_budget_list(s);
                return {};
            } catch (const CLI::ValidationError& e) {
                return e.what();
            }
        })
        ->capture_default_str();
    diag->add_option("--k", diag_args.k, "ensemble depth for the encoder side")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    diag->add_option("--ensemble", diag_args.ensemble, "aggregation: avg|max|min")
        ->check(CLI::IsMember({"avg", "max", "min"}))
        ->capture_default_str();
    diag->add_option("--k-sweep", diag_args.k_sweep,
                     "emit per-K aggregates for K in A..B instead of per-layer rows")
        ->check([](const std::string& s) -> std::string {
            try {
                parse_k_range(s);
                return {};
            } catch (const CLI::ValidationError& e) {
                return e.what();
            }
        });
    diag->add_option("--out-csv", diag_args.out_csv, "output CSV")->required();
    diag->add_option("--out-json", diag_args.out_json, "output JSON")->required();

    SimArgs sim_args;
    CLI::App* sim = app.add_subcommand("sim", "generate deterministic toy encoder/decoder traces");
    sim->add_option("--seed", sim_args.config.seed, "RNG seed")->capture_default_str();
    sim->add_option("--tokens", sim_args.config.n_visual, "visual token count")
        ->capture_default_str();
    sim->add_option("--planted", sim_args.config.planted, "planted salient-token count")
        ->capture_default_str();
    sim->add_option("--gamma", sim_args.config.gamma, "planted feature-scale multiplier (>= 1)")
        ->capture_default_str();
    sim->add_option("--width", sim_args.config.width, "model width d")->capture_default_str();
    sim->add_option("--heads", sim_args.config.heads, "attention heads")->capture_default_str();
    sim->add_option("--enc-layers", sim_args.config.enc_layers, "encoder layers")
        ->capture_default_str();
    sim->add_option("--dec-layers", sim_args.config.dec_layers, "decoder layers")
        ->capture_default_str();
    sim->add_option("--output-tokens", sim_args.config.output_tokens, "decoder output tokens")
        ->capture_default_str();
    sim->add_option("--out", sim_args.out_dir, "output directory")->required();

    CostArgs cost_args;
    CLI::App* cost = app.add_subcommand("cost", "prefill FLOPs and KV-memory before/after pruning");
    cost->add_option("--d", cost_args.dims.width, "hidden width")->required();
    cost->add_option("--ffn", cost_args.dims.ffn_width, "FFN inner width")->required();
    cost->add_option("--layers", cost_args.dims.layers, "decoder layers")->required();
    cost->add_option("--text", cost_args.dims.text_tokens, "text token count")->required();
    cost->add_option("--full", cost_args.dims.visual_tokens_full, "full visual token count")
        ->required();
    cost->add_option("--keep", cost_args.dims.visual_tokens_kept, "kept visual tokens")
        ->required();
    cost->add_option("--after-layer", cost_args.dims.prune_layer,
                     "prune after this layer (0 = before the LLM)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (score->parsed()) return run_score(score_args);
        if (prune->parsed()) return run_prune(prune_args);
        if (diag->parsed()) return run_diag(diag_args);
        if (sim->parsed()) return run_sim(sim_args);
        if (cost->parsed()) return run_cost(cost_args);
    } catch (const vtc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
