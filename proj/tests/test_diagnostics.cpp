// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#include "vtc/diagnostics.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "vtc/errors.hpp"
#include "vtc/simulator.hpp"

using vtc::AttentionTrace;
using vtc::EnsembleFn;
using vtc::ImportanceScore;
using vtc::overlap_proportion;
using vtc::TokenSelection;
using vtc::TraceRole;

namespace {

TokenSelection selection_of(std::vector<std::uint32_t> kept, std::uint32_t budget,
                            std::uint32_t n_visual) {
    return {std::move(kept), budget, n_visual};
}

}  // namespace

TEST_CASE("overlap_proportion: examples") {
    CHECK(overlap_proportion(selection_of({0, 1}, 2, 8), selection_of({0, 1}, 2, 8)) == 1.0);
    CHECK(overlap_proportion(selection_of({0, 1}, 2, 8), selection_of({1, 2}, 2, 8)) == 0.5);
    CHECK(overlap_proportion(selection_of({0, 1}, 2, 8), selection_of({4, 5}, 2, 8)) == 0.0);
}

TEST_CASE("overlap_proportion: budget mismatch") {
    CHECK_THROWS_AS(overlap_proportion(selection_of({0}, 1, 8), selection_of({0, 1}, 2, 8)),
                    vtc::InvalidComparison);
    CHECK_THROWS_AS(overlap_proportion(selection_of({0}, 1, 8), selection_of({0}, 1, 9)),
                    vtc::InvalidComparison);
}

TEST_CASE("overlap_proportion: symmetric and equal to brute-force counting") {
    std::mt19937_64 gen(79);
    for (int iter = 0; iter < 200; ++iter) {
        const std::uint32_t n = 24;
        const std::uint32_t u = 6;
        const auto a = vtc::top_u(vtc::random_importance(n, gen()), u);
        const auto b = vtc::top_u(vtc::random_importance(n, gen()), u);

        std::size_t shared = 0;
        for (std::uint32_t x : a.kept) {
            for (std::uint32_t y : b.kept) {
                if (x == y) ++shared;
            }
        }
        const double want = static_cast<double>(shared) / u;
        CHECK(overlap_proportion(a, b) == doctest::Approx(want).epsilon(1e-15));
        CHECK(overlap_proportion(b, a) == doctest::Approx(want).epsilon(1e-15));
    }
}

TEST_CASE("spearman: examples") {
    const std::vector<double> a{0.3, 0.1, 0.8, 0.4};
    CHECK(vtc::spearman(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    // Exactly reversed ranking.
    const std::vector<double> rev{0.8, 0.9, 0.1, 0.6};
    std::vector<double> flipped(rev.size());
    for (std::size_t i = 0; i < rev.size(); ++i) flipped[i] = 1.0 - rev[i];
    CHECK(vtc::spearman(rev, flipped) == doctest::Approx(-1.0).epsilon(1e-12));

    // ranks([3,1,2]) = [1,3,2], ranks([3,2,1]) = [1,2,3] -> pearson 0.5.
    CHECK(vtc::spearman(std::vector<double>{3, 1, 2}, std::vector<double>{3, 2, 1}) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("spearman: invariant under strictly increasing transforms") {
    std::mt19937_64 gen(83);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> a(20), b(20);
        for (double& v : a) v = val(gen);
        for (double& v : b) v = val(gen);
        const double base = vtc::spearman(a, b);

        std::vector<double> warped(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) warped[i] = std::exp(5.0 * a[i]);
        CHECK(vtc::spearman(warped, b) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("spearman: constant input is degenerate, mismatched lengths invalid") {
    CHECK_THROWS_AS(vtc::spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                    vtc::DegenerateVariance);
    CHECK_THROWS_AS(vtc::spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}),
                    vtc::InvalidInput);
}

TEST_CASE("consistency_report: decoder layers mirroring the encoder give p=1, c=1") {
    // Encoder: L=2, H=1; K=1 makes layer 0 the scoring anchor.
    const std::vector<float> row{0.05f, 0.25f, 0.1f, 0.3f, 0.2f};
    AttentionTrace enc;
    enc.role = TraceRole::Encoder;
    enc.num_layers = 2;
    enc.num_heads = 1;
    enc.num_visual_tokens = 5;
    enc.values = row;
    enc.values.insert(enc.values.end(), {0.3f, 0.1f, 0.2f, 0.05f, 0.25f});

    AttentionTrace dec;
    dec.role = TraceRole::Decoder;
    dec.num_layers = 3;
    dec.num_heads = 1;
    dec.num_output_tokens = 1;
    dec.num_visual_tokens = 5;
    for (int layer = 0; layer < 3; ++layer) {
        dec.values.insert(dec.values.end(), row.begin(), row.end());
    }

    const std::vector<std::uint32_t> budgets{2, 4};
    const auto report = vtc::consistency_report(enc, dec, budgets, 1, EnsembleFn::Avg);
    REQUIRE(report.per_layer.size() == 3);
    for (const auto& layer : report.per_layer) {
        CHECK(layer.spearman == doctest::Approx(1.0).epsilon(1e-12));
        for (double p : layer.overlap) {
            CHECK(p == 1.0);
        }
    }
    CHECK(report.mean_overlap == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.mean_spearman == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("consistency_report: random selections overlap at the U/N_v rate") {
    // Hypergeometric expectation: a random size-U set against a fixed
    // size-U set shares U^2/N_v tokens on average, i.e. overlap U/N_v.
    const std::uint32_t n_visual = 64;
    const std::uint32_t budget = 16;
    const auto fixed = vtc::top_u(vtc::random_importance(n_visual, 999999), budget);

    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto random_sel = vtc::top_u(vtc::random_importance(n_visual, seed), budget);
        mean += overlap_proportion(fixed, random_sel);
    }
    mean /= 200.0;
    const double expected = static_cast<double>(budget) / n_visual;
    CHECK(std::abs(mean - expected) <= 0.05);
}

TEST_CASE("consistency_report: trace mismatch and role errors") {
    const vtc::SimConfig config{.seed = 9, .n_visual = 16, .width = 16, .heads = 2,
                                .enc_layers = 3, .dec_layers = 2, .output_tokens = 2};
    const auto out = vtc::simulate(config);

    vtc::SimConfig other = config;
    other.n_visual = 12;
    const auto out2 = vtc::simulate(other);

    const std::vector<std::uint32_t> budgets{4};
    CHECK_THROWS_AS(
        vtc::consistency_report(out.encoder_trace, out2.decoder_trace, budgets, 1, EnsembleFn::Avg),
        vtc::TraceMismatch);
    CHECK_THROWS_AS(
        vtc::consistency_report(out.decoder_trace, out.decoder_trace, budgets, 1, EnsembleFn::Avg),
        vtc::RoleError);
    CHECK_THROWS_AS(
        vtc::consistency_report(out.encoder_trace, out.encoder_trace, budgets, 1, EnsembleFn::Avg),
        vtc::RoleError);
}

TEST_CASE("k_sweep: shape contract and single-K reduction") {
    const vtc::SimConfig config{.seed = 4, .n_visual = 20, .width = 16, .heads = 2,
                                .enc_layers = 6, .dec_layers = 3, .output_tokens = 2};
    const auto out = vtc::simulate(config);
    const std::vector<std::uint32_t> budgets{4, 8};

    const auto sweep = vtc::k_sweep(out.encoder_trace, out.decoder_trace, budgets, 1, 5,
                                    EnsembleFn::Avg);
    REQUIRE(sweep.size() == 5);
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        CHECK(sweep[i].k == i + 1);
    }

    const auto single = vtc::k_sweep(out.encoder_trace, out.decoder_trace, budgets, 3, 3,
                                     EnsembleFn::Avg);
    const auto report =
        vtc::consistency_report(out.encoder_trace, out.decoder_trace, budgets, 3, EnsembleFn::Avg);
    REQUIRE(single.size() == 1);
    CHECK(single[0].mean_overlap == doctest::Approx(report.mean_overlap).epsilon(1e-15));
    CHECK(single[0].mean_spearman == doctest::Approx(report.mean_spearman).epsilon(1e-15));

    CHECK_THROWS_AS(vtc::k_sweep(out.encoder_trace, out.decoder_trace, budgets, 1, 6,
                                 EnsembleFn::Avg),
                    vtc::InvalidK);
}

TEST_CASE("k_sweep: ensembling K=3 beats K=1 on most planted-saliency seeds") {
    // Calibrated over the simulator's seed distribution; the deeper window
    // averages away per-layer noise, so its overlap should win (or tie) on
    // a clear majority of seeds.
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const vtc::SimConfig config{.seed = seed, .n_visual = 32, .width = 32, .heads = 4,
                                    .enc_layers = 6, .dec_layers = 4, .output_tokens = 4,
                                    .planted = 8, .gamma = 4.0};
        const auto out = vtc::simulate(config);
        const std::vector<std::uint32_t> budgets{8};
        const auto sweep = vtc::k_sweep(out.encoder_trace, out.decoder_trace, budgets, 1, 3,
                                        EnsembleFn::Avg);
        if (sweep[2].mean_overlap >= sweep[0].mean_overlap) {
            ++wins;
        }
    }
    MESSAGE("K=3 overlap >= K=1 overlap on ", wins, " of 100 seeds");
    CHECK(wins >= 60);
}

TEST_CASE("report serialization: CSV rows and JSON aggregates") {
    const vtc::SimConfig config{.seed = 12, .n_visual = 16, .width = 16, .heads = 2,
                                .enc_layers = 4, .dec_layers = 3, .output_tokens = 2};
    const auto out = vtc::simulate(config);
    const std::vector<std::uint32_t> budgets{4, 8};
    const auto report =
        vtc::consistency_report(out.encoder_trace, out.decoder_trace, budgets, 2, EnsembleFn::Avg);

    std::ostringstream csv;
    vtc::write_report_csv(csv, report);
    std::istringstream lines(csv.str());
    std::string line;
    std::size_t data_rows = 0;
    std::getline(lines, line);
    CHECK(line == "layer,n,U,overlap,spearman");
    while (std::getline(lines, line)) {
        if (!line.empty() && line[0] != '#') ++data_rows;
    }
    CHECK(data_rows == 3 * 2);  // L_dec x |budgets|

    const auto j = vtc::to_json(report);
    CHECK(j["per_layer"].size() == 3);
    CHECK(j["aggregates"].contains("mean_overlap"));
    CHECK(j["aggregates"].contains("mean_spearman"));
    CHECK(j["config"]["k"] == 2);

    const auto sweep = vtc::k_sweep(out.encoder_trace, out.decoder_trace, budgets, 1, 3,
                                    EnsembleFn::Avg);
    std::ostringstream sweep_csv;
    vtc::write_sweep_csv(sweep_csv, sweep);
    std::istringstream sweep_lines(sweep_csv.str());
    std::size_t sweep_rows = 0;
    std::getline(sweep_lines, line);
    CHECK(line == "k,mean_overlap,mean_spearman");
    while (std::getline(sweep_lines, line)) {
        if (!line.empty()) ++sweep_rows;
    }
    CHECK(sweep_rows == 3);
}
