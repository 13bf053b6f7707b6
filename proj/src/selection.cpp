// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#include "vtc/selection.hpp"

#include <algorithm>
#include <numeric>

namespace vtc {

PruneLocation PruneLocation::after_llm_layer(std::uint32_t p) {
    if (p < 1) {
        throw InvalidInput("PruneLocation: deferred prune layer must be >= 1");
    }
    return {p};
}

TokenSelection top_u(const ImportanceScore& scores, std::uint32_t budget) {
    if (budget == 0) {
        throw InvalidBudget("top_u: budget must be >= 1");
    }
    const std::uint32_t n = scores.size();
    if (n == 0) {
        throw InvalidInput("top_u: empty score vector");
    }

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    // Score descending, index ascending on ties.
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (scores.scores[a] != scores.scores[b]) {
            return scores.scores[a] > scores.scores[b];
        }
        return a < b;
    });

    const std::uint32_t keep = std::min(budget, n);
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return {std::move(order), budget, n};
}

PrunePlan make_prune_plan(const ImportanceScore& scores, std::uint32_t budget,
                          PruneLocation location) {
    return {top_u(scores, budget), location};
}

nlohmann::json to_json(const TokenSelection& selection) {
    return nlohmann::json{{"budget", selection.budget}, {"kept", selection.kept}};
}

nlohmann::json to_json(const PrunePlan& plan) {
    nlohmann::json j = to_json(plan.selection);
    if (plan.location.deferred()) {
        j["after_layer"] = plan.location.after_layer;
    }
    return j;
}

TokenSelection selection_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("budget") || !j.contains("kept") || !j["kept"].is_array()) {
        throw FormatError("selection_from_json: not a selection document");
    }
    TokenSelection sel;
    sel.budget = j["budget"].get<std::uint32_t>();
    sel.kept = j["kept"].get<std::vector<std::uint32_t>>();
    if (!std::is_sorted(sel.kept.begin(), sel.kept.end()) ||
        std::adjacent_find(sel.kept.begin(), sel.kept.end()) != sel.kept.end()) {
        throw FormatError("selection_from_json: kept indices must be strictly increasing");
    }
    sel.n_visual = sel.kept.empty() ? 0 : sel.kept.back() + 1;
    return sel;
}

}  // namespace vtc
