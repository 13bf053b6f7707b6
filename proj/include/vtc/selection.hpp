// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "vtc/errors.hpp"
#include "vtc/scoring.hpp"

namespace vtc {

// The kept token set for a budget U. Indices are 0-based, unique and
// strictly increasing (positional order, not score order), so downstream
// consumers see tokens in their original sequence order. Ties are broken
// toward the lower index.
struct TokenSelection {
    std::vector<std::uint32_t> kept;
    std::uint32_t budget = 0;
    std::uint32_t n_visual = 0;

    bool operator==(const TokenSelection&) const = default;
};

// Where the pruning happens: before the LLM (the default path) or after
// LLM layer P in the deferred mode. after_layer == 0 means before-LLM.
struct PruneLocation {
    std::uint32_t after_layer = 0;

    static PruneLocation before_llm() { return {0}; }
    static PruneLocation after_llm_layer(std::uint32_t p);

    bool deferred() const { return after_layer > 0; }
    bool operator==(const PruneLocation&) const = default;
};

struct PrunePlan {
    TokenSelection selection;
    PruneLocation location;
};

// Keeps the U highest-scoring indices (all of them if U >= N_v).
// Throws InvalidBudget when budget == 0.
TokenSelection top_u(const ImportanceScore& scores, std::uint32_t budget);

// Keeps the tokens at the selected indices, preserving relative order.
// Throws SelectionMismatch if any kept index is out of bounds.
template <typename T>
std::vector<T> prune_sequence(std::span<const T> tokens, const TokenSelection& selection) {
    for (std::uint32_t idx : selection.kept) {
        if (idx >= tokens.size()) {
            throw SelectionMismatch("prune_sequence: kept index " + std::to_string(idx) +
                                    " out of bounds for length " + std::to_string(tokens.size()));
        }
    }
    std::vector<T> out;
    out.reserve(selection.kept.size());
    for (std::uint32_t idx : selection.kept) {
        out.push_back(tokens[idx]);
    }
    return out;
}

// Builds a plan from encoder-derived scores. The same selection drives
// both locations; deferring only changes where the drop happens.
PrunePlan make_prune_plan(const ImportanceScore& scores, std::uint32_t budget,
                          PruneLocation location);

nlohmann::json to_json(const TokenSelection& selection);
nlohmann::json to_json(const PrunePlan& plan);
TokenSelection selection_from_json(const nlohmann::json& j);

}  // namespace vtc
