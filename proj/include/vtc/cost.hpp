// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <json.hpp>

namespace vtc {

// Decoder-only prefill shape. prune_layer P = 0 means the visual tokens
// are dropped before the LLM; P = L means they are never dropped.
struct ModelDims {
    std::uint64_t width = 0;               // hidden width d
    std::uint64_t ffn_width = 0;           // FFN inner width m
    std::uint64_t layers = 0;              // decoder layers L
    std::uint64_t text_tokens = 0;         // n_text
    std::uint64_t visual_tokens_full = 0;  // n_vis_full
    std::uint64_t visual_tokens_kept = 0;  // kept budget U
    std::uint64_t prune_layer = 0;         // P

    void validate() const;  // throws InvalidConfig
};

struct FlopsReport {
    std::uint64_t full = 0;
    std::uint64_t compressed = 0;
    double ratio = 0.0;  // compressed / full, in (0, 1]
};

struct KvReport {
    std::uint64_t full_elements = 0;
    std::uint64_t compressed_elements = 0;
    double ratio = 0.0;
};

// Prefill FLOPs with the per-layer cost
//   cost(n) = 8 n d^2 (QKV+output projections)
//           + 4 n^2 d (attention score and context matmuls)
//           + 4 n d m (the two FFN matrices).
// Full runs every layer at n_text + n_vis_full; compressed runs layers
// 0..P-1 at that width and the rest at n_text + U. Vocabulary projection
// and encoder cost are excluded: compression leaves them unchanged.
FlopsReport prefill_flops(const ModelDims& dims);

// KV cache elements: 2 (key+value) per layer per token per channel.
KvReport kv_memory(const ModelDims& dims);

nlohmann::json cost_report_json(const ModelDims& dims);

}  // namespace vtc
