// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "vtc/selection.hpp"
#include "vtc/trace.hpp"

namespace vtc {

// Desk-scale stand-in for a ViT encoder plus a causal decoder. Everything
// is drawn from a counter-based generator, so a config maps to exactly one
// pair of traces, bit for bit.
struct SimConfig {
    std::uint64_t seed = 0;
    std::uint32_t n_visual = 32;      // visual tokens N_v
    std::uint32_t width = 32;         // model width d (heads must divide it)
    std::uint32_t heads = 4;
    std::uint32_t enc_layers = 6;     // >= 2 so a penultimate layer exists
    std::uint32_t dec_layers = 4;
    std::uint32_t output_tokens = 4;  // seeded stand-ins for generated text
    std::uint32_t planted = 0;        // size of the planted salient set S
    double gamma = 1.0;               // feature-scale multiplier, >= 1

    void validate() const;  // throws InvalidConfig
};

struct SimOutput {
    AttentionTrace encoder_trace;
    AttentionTrace decoder_trace;
    std::vector<std::uint32_t> planted;  // sorted ground-truth indices
};

// Decoder attention rows for one layer. Row length can change at the
// deferred prune layer, which a fixed-N_v AttentionTrace cannot express.
struct DecoderLayerRows {
    std::uint32_t num_tokens = 0;  // visual positions visible at this layer
    std::uint32_t num_heads = 0;
    std::uint32_t num_outputs = 0;
    std::vector<float> values;  // [head][output][token]

    std::span<const float> row(std::uint32_t head, std::uint32_t output) const;
};

struct PrunedSimOutput {
    AttentionTrace encoder_trace;
    std::vector<DecoderLayerRows> decoder_layers;
    std::vector<std::uint32_t> kept;     // selection applied, ascending
    std::vector<std::uint32_t> planted;
};

// Full pipeline: seeded token features (planted ones scaled by gamma), an
// encoder whose [CLS] row is recorded at every layer/head, then a causal
// decoder over the encoder's final visual features with every output
// token's row recorded. Identical configs produce bit-identical traces.
SimOutput simulate(const SimConfig& config);

// Same pipeline with the plan applied: BeforeLLM drops tokens before the
// decoder's first layer; AfterLLMLayer(P) runs layers 0..P-1 on the full
// set and drops afterwards. Rows are recorded at the positions that
// survive at each layer.
PrunedSimOutput simulate_with_pruning(const SimConfig& config, const PrunePlan& plan);

// Collapses ragged decoder rows into an AttentionTrace; only valid when
// every layer kept the same token count (full runs and BeforeLLM plans).
AttentionTrace uniform_decoder_trace(const PrunedSimOutput& output);

nlohmann::json sidecar_json(const SimConfig& config, std::span<const std::uint32_t> planted);

}  // namespace vtc
