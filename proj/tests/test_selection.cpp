// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#include "vtc/selection.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "vtc/errors.hpp"

using vtc::ImportanceScore;
using vtc::PruneLocation;
using vtc::TokenSelection;
using vtc::top_u;

namespace {

ImportanceScore scores_of(std::vector<double> v) {
    return {std::move(v), {}};
}

}  // namespace

TEST_CASE("top_u: examples") {
    CHECK(top_u(scores_of({0.2, 0.5, 0.3}), 2).kept == std::vector<std::uint32_t>{1, 2});
    // Tie at 0.5: the lower index wins the single slot.
    CHECK(top_u(scores_of({0.5, 0.5, 0.1}), 1).kept == std::vector<std::uint32_t>{0});
    // Budget at or above N_v keeps everything.
    CHECK(top_u(scores_of({0.2, 0.5, 0.3}), 7).kept == std::vector<std::uint32_t>{0, 1, 2});
}

TEST_CASE("top_u: zero budget is rejected") {
    CHECK_THROWS_AS(top_u(scores_of({0.5}), 0), vtc::InvalidBudget);
}

TEST_CASE("top_u: matches the full-sort oracle on random vectors") {
    std::mt19937_64 gen(61);
    std::uniform_int_distribution<std::size_t> len(1, 80);
    std::uniform_int_distribution<int> val(0, 20);  // duplicates on purpose
    for (int iter = 0; iter < 1000; ++iter) {
        std::vector<double> v(len(gen));
        for (double& x : v) x = val(gen) / 20.0;
        std::uniform_int_distribution<std::uint32_t> budget(1, 90);
        const std::uint32_t u = budget(gen);

        const TokenSelection sel = top_u(scores_of(v), u);
        CHECK(sel.kept == oracle::top_u(v, u));
        CHECK(sel.kept.size() == std::min<std::size_t>(u, v.size()));
        for (std::size_t i = 1; i < sel.kept.size(); ++i) {
            CHECK(sel.kept[i - 1] < sel.kept[i]);
        }
    }
}

TEST_CASE("top_u: invariant under strictly increasing transforms") {
    std::mt19937_64 gen(67);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<double> v(24);
        for (double& x : v) x = val(gen);
        const auto base = top_u(scores_of(v), 6).kept;

        std::vector<double> warped(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            warped[i] = std::exp(3.0 * v[i]) + 1.0;  // strictly increasing
        }
        CHECK(top_u(scores_of(warped), 6).kept == base);
    }
}

TEST_CASE("prune_sequence: keeps selected tokens in original order") {
    const std::vector<std::string> tokens{"t0", "t1", "t2", "t3"};
    TokenSelection sel{{0, 2}, 2, 4};
    CHECK(vtc::prune_sequence<std::string>(tokens, sel) ==
          std::vector<std::string>{"t0", "t2"});

    TokenSelection all{{0, 1, 2, 3}, 4, 4};
    CHECK(vtc::prune_sequence<std::string>(tokens, all) == tokens);
}

TEST_CASE("prune_sequence: out-of-bounds index") {
    const std::vector<int> tokens{1, 2, 3};
    TokenSelection sel{{3}, 1, 4};
    CHECK_THROWS_AS(vtc::prune_sequence<int>(tokens, sel), vtc::SelectionMismatch);
}

TEST_CASE("prune_sequence: pruning twice with a keep-all selection changes nothing") {
    std::mt19937_64 gen(71);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    std::vector<double> scores(12);
    for (double& x : scores) x = val(gen);
    std::vector<int> tokens(12);
    std::iota(tokens.begin(), tokens.end(), 100);

    const TokenSelection sel = top_u(scores_of(scores), 5);
    const auto once = vtc::prune_sequence<int>(tokens, sel);

    TokenSelection full;
    full.budget = static_cast<std::uint32_t>(once.size());
    full.n_visual = static_cast<std::uint32_t>(once.size());
    full.kept.resize(once.size());
    std::iota(full.kept.begin(), full.kept.end(), 0u);
    CHECK(vtc::prune_sequence<int>(once, full) == once);
}

TEST_CASE("make_prune_plan: same selection regardless of location") {
    std::mt19937_64 gen(73);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    std::vector<double> v(576);
    for (double& x : v) x = val(gen);
    const ImportanceScore s = scores_of(v);

    const auto before = vtc::make_prune_plan(s, 128, PruneLocation::before_llm());
    const auto after = vtc::make_prune_plan(s, 128, PruneLocation::after_llm_layer(2));
    CHECK(before.selection == after.selection);
    CHECK(before.selection.kept.size() == 128);
    CHECK_FALSE(before.location.deferred());
    CHECK(after.location.after_layer == 2);
}

TEST_CASE("make_prune_plan: deferred location must be at least layer 1") {
    CHECK_THROWS_AS(PruneLocation::after_llm_layer(0), vtc::InvalidInput);
}

TEST_CASE("selection JSON round trip") {
    const auto plan =
        vtc::make_prune_plan(scores_of({0.9, 0.1, 0.5, 0.7}), 2, PruneLocation::after_llm_layer(2));
    const auto j = vtc::to_json(plan);
    CHECK(j["budget"] == 2);
    CHECK(j["kept"] == std::vector<std::uint32_t>{0, 3});
    CHECK(j["after_layer"] == 2);

    const auto plain = vtc::to_json(plan.selection);
    CHECK_FALSE(plain.contains("after_layer"));
    const TokenSelection back = vtc::selection_from_json(plain);
    CHECK(back.kept == plan.selection.kept);
    CHECK(back.budget == plan.selection.budget);
}
