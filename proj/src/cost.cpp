// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#include "vtc/cost.hpp"

#include <limits>

#include "vtc/errors.hpp"

namespace vtc {

namespace {

__extension__ typedef unsigned __int128 u128;

std::uint64_t narrow(u128 v, const char* what) {
    if (v > std::numeric_limits<std::uint64_t>::max()) {
        throw InvalidConfig(std::string("cost model: ") + what + " overflows 64 bits");
    }
    return static_cast<std::uint64_t>(v);
}

u128 layer_cost(u128 n, u128 d, u128 m) {
    return 8 * n * d * d + 4 * n * n * d + 4 * n * d * m;
}

}  // namespace

void ModelDims::validate() const {
    if (width == 0 || ffn_width == 0 || layers == 0) {
        throw InvalidConfig("cost model: d, m and L must be >= 1");
    }
    if (visual_tokens_full == 0 || visual_tokens_kept == 0) {
        throw InvalidConfig("cost model: visual token counts must be >= 1");
    }
    if (visual_tokens_kept > visual_tokens_full) {
        throw InvalidConfig("cost model: kept tokens exceed full count");
    }
    if (prune_layer > layers) {
        throw InvalidConfig("cost model: prune layer beyond last layer");
    }
}

FlopsReport prefill_flops(const ModelDims& dims) {
    dims.validate();
    const u128 n_full = dims.text_tokens + dims.visual_tokens_full;
    const u128 n_kept = dims.text_tokens + dims.visual_tokens_kept;

    const u128 full = u128(dims.layers) * layer_cost(n_full, dims.width, dims.ffn_width);
    const u128 compressed =
        u128(dims.prune_layer) * layer_cost(n_full, dims.width, dims.ffn_width) +
        u128(dims.layers - dims.prune_layer) * layer_cost(n_kept, dims.width, dims.ffn_width);

    FlopsReport report;
    report.full = narrow(full, "full prefill FLOPs");
    report.compressed = narrow(compressed, "compressed prefill FLOPs");
    report.ratio = static_cast<double>(report.compressed) / static_cast<double>(report.full);
    return report;
}

KvReport kv_memory(const ModelDims& dims) {
    dims.validate();
    const u128 n_full = dims.text_tokens + dims.visual_tokens_full;
    const u128 n_kept = dims.text_tokens + dims.visual_tokens_kept;

    const u128 full = 2 * u128(dims.layers) * n_full * dims.width;
    const u128 compressed =
        2 * (u128(dims.prune_layer) * n_full + u128(dims.layers - dims.prune_layer) * n_kept) *
        dims.width;

    KvReport report;
    report.full_elements = narrow(full, "full KV elements");
    report.compressed_elements = narrow(compressed, "compressed KV elements");
    report.ratio = static_cast<double>(report.compressed_elements) /
                   static_cast<double>(report.full_elements);
    return report;
}

nlohmann::json cost_report_json(const ModelDims& dims) {
    const FlopsReport flops = prefill_flops(dims);
    const KvReport kv = kv_memory(dims);
    return nlohmann::json{
        {"full", flops.full},
        {"compressed", flops.compressed},
        {"ratio", flops.ratio},
        {"kv_memory",
         {{"full", kv.full_elements},
          {"compressed", kv.compressed_elements},
          {"ratio", kv.ratio}}},
        {"assumptions",
         "decoder-only prefill; per-layer cost 8nd^2 + 4n^2d + 4ndm; KV elements "
         "2*L*n*d; vocabulary projection and vision encoder excluded (unchanged by "
         "compression)"},
        {"dims",
         {{"d", dims.width},
          {"ffn", dims.ffn_width},
          {"layers", dims.layers},
          {"text", dims.text_tokens},
          {"vis_full", dims.visual_tokens_full},
          {"keep", dims.visual_tokens_kept},
          {"after_layer", dims.prune_layer}}}};
}

}  // namespace vtc
