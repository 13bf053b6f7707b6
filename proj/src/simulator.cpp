// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#include "vtc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "vtc/errors.hpp"
#include "vtc/rng.hpp"

namespace vtc {

namespace {

// Softmax temperature and residual damping. Untrained random weights
// saturate the softmax long before trained ones would; the temperature
// keeps rows spread across several tokens, and the damped residual keeps
// early-layer attention output from drowning the token features that
// carry the planted signal.
constexpr double kLogitTemperature = 2.0;
constexpr double kResidualScale = 0.25;

// Stream tags keeping every weight/feature draw on its own counter stream.
enum StreamTag : std::uint64_t {
    kTagVisualFeat = 0x01,
    kTagClsFeat = 0x02,
    kTagOutputFeat = 0x03,
    kTagPlantedPick = 0x04,
    kTagEncoderW = 0x10,  // +0 query, +1 key, +2 value
    kTagDecoderW = 0x20,
};

// Row-major token matrix, one row per token.
struct TokenMatrix {
    std::size_t rows = 0;
    std::uint32_t width = 0;
    std::vector<double> data;

    TokenMatrix(std::size_t r, std::uint32_t w) : rows(r), width(w), data(r * w, 0.0) {}
    double* row(std::size_t i) { return data.data() + i * width; }
    const double* row(std::size_t i) const { return data.data() + i * width; }
};

// Receives the post-softmax attention row of one query; `visible` is the
// number of positions the query could attend to.
using RowSink =
    std::function<void(std::uint32_t head, std::size_t query, std::span<const double> weights)>;

// One multi-head scaled dot-product self-attention layer with a residual
// update. Weights are regenerated from the counter stream keyed by
// `layer_key`, entries scaled by 1/sqrt(d) so activations stay O(1).
void attention_layer(TokenMatrix& x, std::uint32_t heads, std::uint64_t layer_key, bool causal,
                     const RowSink& sink) {
    const std::size_t n = x.rows;
    const std::uint32_t d = x.width;
    const std::uint32_t head_dim = d / heads;
    const double w_scale = 1.0 / std::sqrt(static_cast<double>(d));
    const double logit_scale =
        1.0 / (std::sqrt(static_cast<double>(head_dim)) * kLogitTemperature);

    std::vector<double> update(n * d, 0.0);
    std::vector<double> w(static_cast<std::size_t>(d) * head_dim);
    std::vector<double> q(n * head_dim), k(n * head_dim), v(n * head_dim);
    std::vector<double> weights(n);

    for (std::uint32_t h = 0; h < heads; ++h) {
        for (std::uint32_t m = 0; m < 3; ++m) {  // 0 = query, 1 = key, 2 = value
            const std::uint64_t wkey = rng::mix(layer_key, h, m);
            for (std::size_t e = 0; e < w.size(); ++e) {
                w[e] = rng::standard_normal(wkey, e) * w_scale;
            }
            std::vector<double>& dst = m == 0 ? q : (m == 1 ? k : v);
            for (std::size_t i = 0; i < n; ++i) {
                const double* xi = x.row(i);
                double* out = dst.data() + i * head_dim;
                for (std::uint32_t c = 0; c < head_dim; ++c) {
                    out[c] = 0.0;
                }
                for (std::uint32_t a = 0; a < d; ++a) {
                    const double xa = xi[a];
                    const double* wrow = w.data() + static_cast<std::size_t>(a) * head_dim;
                    for (std::uint32_t c = 0; c < head_dim; ++c) {
                        out[c] += xa * wrow[c];
                    }
                }
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t visible = causal ? i + 1 : n;
            const double* qi = q.data() + i * head_dim;

            double max_logit = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < visible; ++j) {
                const double* kj = k.data() + j * head_dim;
                double dot = 0.0;
                for (std::uint32_t c = 0; c < head_dim; ++c) {
                    dot += qi[c] * kj[c];
                }
                weights[j] = dot * logit_scale;
                max_logit = std::max(max_logit, weights[j]);
            }
            double total = 0.0;
            for (std::size_t j = 0; j < visible; ++j) {
                weights[j] = std::exp(weights[j] - max_logit);
                total += weights[j];
            }
            for (std::size_t j = 0; j < visible; ++j) {
                weights[j] /= total;
            }

            if (sink) {
                sink(h, i, {weights.data(), visible});
            }

            double* yi = update.data() + i * d + static_cast<std::size_t>(h) * head_dim;
            for (std::size_t j = 0; j < visible; ++j) {
                const double wj = weights[j];
                const double* vj = v.data() + j * head_dim;
                for (std::uint32_t c = 0; c < head_dim; ++c) {
                    yi[c] += wj * vj[c];
                }
            }
        }
    }

    for (std::size_t e = 0; e < update.size(); ++e) {
        x.data[e] += kResidualScale * update[e];
    }
}

std::vector<std::uint32_t> pick_planted(const SimConfig& config) {
    std::vector<std::uint32_t> pool(config.n_visual);
    std::iota(pool.begin(), pool.end(), 0u);
    const std::uint64_t key = rng::mix(config.seed, kTagPlantedPick);
    for (std::uint32_t i = 0; i < config.planted; ++i) {
        const std::uint32_t j =
            i + static_cast<std::uint32_t>(rng::mix(key, i) % (config.n_visual - i));
        std::swap(pool[i], pool[j]);
    }
    std::vector<std::uint32_t> planted(pool.begin(), pool.begin() + config.planted);
    std::sort(planted.begin(), planted.end());
    return planted;
}

// Runs the encoder: [CLS] at position 0, visual tokens at 1..N_v. Returns
// the final visual features and fills the encoder trace.
TokenMatrix run_encoder(const SimConfig& config, std::span<const std::uint32_t> planted,
                        AttentionTrace& trace) {
    const std::uint32_t n_vis = config.n_visual;
    TokenMatrix x(n_vis + 1, config.width);

    const std::uint64_t cls_key = rng::mix(config.seed, kTagClsFeat);
    for (std::uint32_t c = 0; c < config.width; ++c) {
        x.row(0)[c] = rng::standard_normal(cls_key, c);
    }
    const std::uint64_t feat_key = rng::mix(config.seed, kTagVisualFeat);
    for (std::uint32_t u = 0; u < n_vis; ++u) {
        const bool is_planted = std::binary_search(planted.begin(), planted.end(), u);
        const double scale = is_planted ? config.gamma : 1.0;
        for (std::uint32_t c = 0; c < config.width; ++c) {
            x.row(u + 1)[c] =
                scale * rng::standard_normal(feat_key, static_cast<std::uint64_t>(u) * config.width + c);
        }
    }

    trace.role = TraceRole::Encoder;
    trace.num_layers = config.enc_layers;
    trace.num_heads = config.heads;
    trace.num_visual_tokens = n_vis;
    trace.num_output_tokens = 0;
    trace.values.assign(trace.expected_value_count(), 0.0f);

    for (std::uint32_t layer = 0; layer < config.enc_layers; ++layer) {
        const std::uint64_t layer_key = rng::mix(config.seed, kTagEncoderW, layer);
        RowSink sink = [&](std::uint32_t head, std::size_t query, std::span<const double> row) {
            if (query != 0) {
                return;  // only the [CLS] query row is kept
            }
            const std::size_t base =
                (static_cast<std::size_t>(layer) * config.heads + head) * n_vis;
            for (std::uint32_t u = 0; u < n_vis; ++u) {
                trace.values[base + u] = static_cast<float>(row[u + 1]);
            }
        };
        attention_layer(x, config.heads, layer_key, /*causal=*/false, sink);
    }

    TokenMatrix visual(n_vis, config.width);
    for (std::uint32_t u = 0; u < n_vis; ++u) {
        std::copy_n(x.row(u + 1), config.width, visual.row(u));
    }
    return visual;
}

// Runs the causal decoder over (visual prefix, output queries). `prune_at`
// is the layer before which the non-kept visual rows are dropped; 0 prunes
// before the first layer, values >= dec_layers never prune.
std::vector<DecoderLayerRows> run_decoder(const SimConfig& config, const TokenMatrix& visual,
                                          std::span<const std::uint32_t> kept,
                                          std::uint32_t prune_at) {
    std::vector<std::uint32_t> current_ids(config.n_visual);
    std::iota(current_ids.begin(), current_ids.end(), 0u);

    TokenMatrix x(static_cast<std::size_t>(config.n_visual) + config.output_tokens, config.width);
    for (std::uint32_t u = 0; u < config.n_visual; ++u) {
        std::copy_n(visual.row(u), config.width, x.row(u));
    }
    const std::uint64_t out_key = rng::mix(config.seed, kTagOutputFeat);
    for (std::uint32_t o = 0; o < config.output_tokens; ++o) {
        for (std::uint32_t c = 0; c < config.width; ++c) {
            x.row(config.n_visual + o)[c] =
                rng::standard_normal(out_key, static_cast<std::uint64_t>(o) * config.width + c);
        }
    }

    auto apply_prune = [&]() {
        if (current_ids.size() == kept.size()) {
            return;  // nothing to drop (keep-all plans)
        }
        TokenMatrix pruned(kept.size() + config.output_tokens, config.width);
        for (std::size_t i = 0; i < kept.size(); ++i) {
            std::copy_n(x.row(kept[i]), config.width, pruned.row(i));
        }
        for (std::uint32_t o = 0; o < config.output_tokens; ++o) {
            std::copy_n(x.row(current_ids.size() + o), config.width,
                        pruned.row(kept.size() + o));
        }
        x = std::move(pruned);
        current_ids.assign(kept.begin(), kept.end());
    };

    std::vector<DecoderLayerRows> layers(config.dec_layers);
    for (std::uint32_t layer = 0; layer < config.dec_layers; ++layer) {
        if (layer == prune_at) {
            apply_prune();
        }
        const std::uint32_t n_vis = static_cast<std::uint32_t>(current_ids.size());

        DecoderLayerRows& rows = layers[layer];
        rows.num_tokens = n_vis;
        rows.num_heads = config.heads;
        rows.num_outputs = config.output_tokens;
        rows.values.assign(
            static_cast<std::size_t>(config.heads) * config.output_tokens * n_vis, 0.0f);

        const std::uint64_t layer_key = rng::mix(config.seed, kTagDecoderW, layer);
        RowSink sink = [&](std::uint32_t head, std::size_t query, std::span<const double> row) {
            if (query < n_vis) {
                return;  // only output-token rows are kept
            }
            const std::uint32_t output = static_cast<std::uint32_t>(query - n_vis);
            const std::size_t base =
                (static_cast<std::size_t>(head) * config.output_tokens + output) * n_vis;
            for (std::uint32_t u = 0; u < n_vis; ++u) {
                rows.values[base + u] = static_cast<float>(row[u]);
            }
        };
        attention_layer(x, config.heads, layer_key, /*causal=*/true, sink);
    }
    return layers;
}

AttentionTrace decoder_trace_from_layers(const std::vector<DecoderLayerRows>& layers) {
    AttentionTrace trace;
    trace.role = TraceRole::Decoder;
    trace.num_layers = static_cast<std::uint32_t>(layers.size());
    trace.num_heads = layers.front().num_heads;
    trace.num_visual_tokens = layers.front().num_tokens;
    trace.num_output_tokens = layers.front().num_outputs;
    trace.values.reserve(trace.expected_value_count());
    for (const DecoderLayerRows& rows : layers) {
        if (rows.num_tokens != trace.num_visual_tokens) {
            throw InvalidTrace("decoder trace: layers disagree on token count");
        }
        trace.values.insert(trace.values.end(), rows.values.begin(), rows.values.end());
    }
    return trace;
}

}  // namespace

void SimConfig::validate() const {
    if (n_visual < 1 || width < 1 || heads < 1 || dec_layers < 1 || output_tokens < 1) {
        throw InvalidConfig("sim config: all counts must be >= 1");
    }
    if (enc_layers < 2) {
        throw InvalidConfig("sim config: need at least two encoder layers");
    }
    if (width % heads != 0) {
        throw InvalidConfig("sim config: heads must divide width");
    }
    if (planted > n_visual) {
        throw InvalidConfig("sim config: planted set larger than N_v");
    }
    if (!(gamma >= 1.0)) {
        throw InvalidConfig("sim config: gamma must be >= 1");
    }
}

std::span<const float> DecoderLayerRows::row(std::uint32_t head, std::uint32_t output) const {
    const std::size_t base =
        (static_cast<std::size_t>(head) * num_outputs + output) * num_tokens;
    return {values.data() + base, num_tokens};
}

SimOutput simulate(const SimConfig& config) {
    config.validate();
    const std::vector<std::uint32_t> planted = pick_planted(config);

    SimOutput out;
    out.planted = planted;
    const TokenMatrix visual = run_encoder(config, planted, out.encoder_trace);

    std::vector<std::uint32_t> keep_all(config.n_visual);
    std::iota(keep_all.begin(), keep_all.end(), 0u);
    const auto layers = run_decoder(config, visual, keep_all, /*prune_at=*/0);
    out.decoder_trace = decoder_trace_from_layers(layers);
    return out;
}

PrunedSimOutput simulate_with_pruning(const SimConfig& config, const PrunePlan& plan) {
    config.validate();
    const TokenSelection& sel = plan.selection;
    if (sel.n_visual != config.n_visual) {
        throw SelectionMismatch("simulate_with_pruning: plan covers " +
                                std::to_string(sel.n_visual) + " tokens, config has " +
                                std::to_string(config.n_visual));
    }
    for (std::uint32_t idx : sel.kept) {
        if (idx >= config.n_visual) {
            throw SelectionMismatch("simulate_with_pruning: kept index out of range");
        }
    }

    const std::vector<std::uint32_t> planted = pick_planted(config);

    PrunedSimOutput out;
    out.planted = planted;
    out.kept = sel.kept;
    const TokenMatrix visual = run_encoder(config, planted, out.encoder_trace);

    const std::uint32_t prune_at = plan.location.deferred() ? plan.location.after_layer : 0;
    out.decoder_layers = run_decoder(config, visual, sel.kept, prune_at);
    return out;
}

AttentionTrace uniform_decoder_trace(const PrunedSimOutput& output) {
    if (output.decoder_layers.empty()) {
        throw InvalidTrace("uniform_decoder_trace: no decoder layers");
    }
    return decoder_trace_from_layers(output.decoder_layers);
}

nlohmann::json sidecar_json(const SimConfig& config, std::span<const std::uint32_t> planted) {
    return nlohmann::json{
        {"planted", std::vector<std::uint32_t>(planted.begin(), planted.end())},
        {"config",
         {{"seed", config.seed},
          {"n_visual", config.n_visual},
          {"width", config.width},
          {"heads", config.heads},
          {"enc_layers", config.enc_layers},
          {"dec_layers", config.dec_layers},
          {"output_tokens", config.output_tokens},
          {"planted", config.planted},
          {"gamma", config.gamma}}}};
}

}  // namespace vtc
