// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtc/trace.hpp"

namespace vtc {

// Elementwise aggregation used when combining per-layer scores.
enum class EnsembleFn { Avg, Max, Min };

std::string to_string(EnsembleFn fn);
EnsembleFn ensemble_from_string(const std::string& s);

// Where an importance vector came from; carried along so exported scores
// stay auditable.
struct ScoreSource {
    enum class Kind { EncoderSingleLayer, EncoderEnsemble, DecoderLayer, Random };

    Kind kind = Kind::EncoderSingleLayer;
    std::uint32_t layer = 0;        // EncoderSingleLayer / DecoderLayer
    std::uint32_t ensemble_k = 0;   // EncoderEnsemble
    EnsembleFn ensemble_fn = EnsembleFn::Avg;
    std::uint64_t seed = 0;         // Random

    std::string label() const;
    bool operator==(const ScoreSource&) const = default;
};

// Non-negative importance per visual token, length N_v of the source trace.
struct ImportanceScore {
    std::vector<double> scores;
    ScoreSource source;

    std::uint32_t size() const { return static_cast<std::uint32_t>(scores.size()); }
};

// Head-averaged [CLS] attention over visual positions at one encoder layer.
ImportanceScore encoder_layer_importance(const AttentionTrace& trace, std::uint32_t layer);

// Aggregates the K per-layer encoder scores ending at the penultimate
// layer (0-indexed layers L-1-K .. L-2; the final layer never
// participates). K=1 reduces to the penultimate-layer score for every
// ensemble function.
ImportanceScore encoder_ensemble_importance(const AttentionTrace& trace, std::uint32_t k,
                                            EnsembleFn fn);

// Attention to visual tokens averaged over all heads and output tokens of
// one decoder layer.
ImportanceScore decoder_layer_importance(const AttentionTrace& trace, std::uint32_t layer);

// Uniform [0,1) baseline scores. Counter-based: scores[i] depends only on
// (seed, i), never on draw order.
ImportanceScore random_importance(std::uint32_t n_visual, std::uint64_t seed);

nlohmann::json to_json(const ImportanceScore& score);
ImportanceScore importance_from_json(const nlohmann::json& j);

}  // namespace vtc
