// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#include "vtc/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "vtc/errors.hpp"
#include "vtc/rng.hpp"

namespace vtc {

namespace {

void require_encoder(const AttentionTrace& trace, const char* op) {
    if (trace.role != TraceRole::Encoder) {
        throw RoleError(std::string(op) + ": expected an encoder trace");
    }
}

void require_decoder(const AttentionTrace& trace, const char* op) {
    if (trace.role != TraceRole::Decoder) {
        throw RoleError(std::string(op) + ": expected a decoder trace");
    }
}

// Stored values may dip a hair below zero within format tolerance; scores
// are clamped so the non-negativity invariant stays hard.
double clamp_score(double v) {
    return std::max(v, 0.0);
}

}  // namespace

std::string to_string(EnsembleFn fn) {
    switch (fn) {
        case EnsembleFn::Avg: return "avg";
        case EnsembleFn::Max: return "max";
        case EnsembleFn::Min: return "min";
    }
    throw InvalidInput("to_string: bad ensemble fn");
}

EnsembleFn ensemble_from_string(const std::string& s) {
    if (s == "avg") return EnsembleFn::Avg;
    if (s == "max") return EnsembleFn::Max;
    if (s == "min") return EnsembleFn::Min;
    throw InvalidInput("ensemble_from_string: unknown ensemble \"" + s + "\"");
}

std::string ScoreSource::label() const {
    switch (kind) {
        case Kind::EncoderSingleLayer:
            return "encoder_layer(" + std::to_string(layer) + ")";
        case Kind::EncoderEnsemble:
            return "encoder_ensemble(k=" + std::to_string(ensemble_k) + "," +
                   to_string(ensemble_fn) + ")";
        case Kind::DecoderLayer:
            return "decoder_layer(" + std::to_string(layer) + ")";
        case Kind::Random:
            return "random(seed=" + std::to_string(seed) + ")";
    }
    throw InvalidInput("label: bad score source");
}

ImportanceScore encoder_layer_importance(const AttentionTrace& trace, std::uint32_t layer) {
    require_encoder(trace, "encoder_layer_importance");
    if (layer >= trace.num_layers) {
        throw InvalidLayer("encoder_layer_importance: layer " + std::to_string(layer) +
                           " out of range for L=" + std::to_string(trace.num_layers));
    }

    std::vector<double> scores(trace.num_visual_tokens, 0.0);
    for (std::uint32_t h = 0; h < trace.num_heads; ++h) {
        const auto row = trace.encoder_row(layer, h);
        for (std::uint32_t u = 0; u < trace.num_visual_tokens; ++u) {
            scores[u] += row[u];
        }
    }
    for (double& s : scores) {
        s = clamp_score(s / trace.num_heads);
    }
    return {std::move(scores),
            ScoreSource{.kind = ScoreSource::Kind::EncoderSingleLayer, .layer = layer}};
}

ImportanceScore encoder_ensemble_importance(const AttentionTrace& trace, std::uint32_t k,
                                            EnsembleFn fn) {
    require_encoder(trace, "encoder_ensemble_importance");
    if (trace.num_layers < 2) {
        throw InvalidTrace("encoder_ensemble_importance: need at least two encoder layers");
    }
    if (k < 1 || k > trace.num_layers - 1) {
        throw InvalidK("encoder_ensemble_importance: K=" + std::to_string(k) +
                       " outside [1, " + std::to_string(trace.num_layers - 1) + "]");
    }

    // Window of K layers ending at the penultimate layer L-2.
    const std::uint32_t first_layer = trace.num_layers - 1 - k;
    std::vector<double> agg;
    for (std::uint32_t offset = 0; offset < k; ++offset) {
        const auto layer_score = encoder_layer_importance(trace, first_layer + offset).scores;
        if (offset == 0) {
            agg = layer_score;
            continue;
        }
        for (std::size_t u = 0; u < agg.size(); ++u) {
            switch (fn) {
                case EnsembleFn::Avg: agg[u] += layer_score[u]; break;
                case EnsembleFn::Max: agg[u] = std::max(agg[u], layer_score[u]); break;
                case EnsembleFn::Min: agg[u] = std::min(agg[u], layer_score[u]); break;
            }
        }
    }
    if (fn == EnsembleFn::Avg) {
        for (double& s : agg) {
            s /= k;
        }
    }
    return {std::move(agg), ScoreSource{.kind = ScoreSource::Kind::EncoderEnsemble,
                                        .ensemble_k = k,
                                        .ensemble_fn = fn}};
}

ImportanceScore decoder_layer_importance(const AttentionTrace& trace, std::uint32_t layer) {
    require_decoder(trace, "decoder_layer_importance");
    if (trace.num_output_tokens == 0) {
        throw NoOutputTokens("decoder_layer_importance: trace has no output tokens");
    }
    if (layer >= trace.num_layers) {
        throw InvalidLayer("decoder_layer_importance: layer " + std::to_string(layer) +
                           " out of range for L=" + std::to_string(trace.num_layers));
    }

    std::vector<double> scores(trace.num_visual_tokens, 0.0);
    for (std::uint32_t h = 0; h < trace.num_heads; ++h) {
        for (std::uint32_t o = 0; o < trace.num_output_tokens; ++o) {
            const auto row = trace.decoder_row(layer, h, o);
            for (std::uint32_t u = 0; u < trace.num_visual_tokens; ++u) {
                scores[u] += row[u];
            }
        }
    }
    const double denom =
        static_cast<double>(trace.num_heads) * static_cast<double>(trace.num_output_tokens);
    for (double& s : scores) {
        s = clamp_score(s / denom);
    }
    return {std::move(scores),
            ScoreSource{.kind = ScoreSource::Kind::DecoderLayer, .layer = layer}};
}

ImportanceScore random_importance(std::uint32_t n_visual, std::uint64_t seed) {
    if (n_visual == 0) {
        throw InvalidInput("random_importance: N_v must be >= 1");
    }
    std::vector<double> scores(n_visual);
    const std::uint64_t key = rng::mix(seed, 0x72616e646f6dULL);  // stream tag
    for (std::uint32_t u = 0; u < n_visual; ++u) {
        scores[u] = rng::uniform01(key, u);
    }
    return {std::move(scores), ScoreSource{.kind = ScoreSource::Kind::Random, .seed = seed}};
}

nlohmann::json to_json(const ImportanceScore& score) {
    nlohmann::json src;
    switch (score.source.kind) {
        case ScoreSource::Kind::EncoderSingleLayer:
            src = {{"kind", "encoder_layer"}, {"layer", score.source.layer}};
            break;
        case ScoreSource::Kind::EncoderEnsemble:
            src = {{"kind", "encoder_ensemble"},
                   {"k", score.source.ensemble_k},
                   {"ensemble", to_string(score.source.ensemble_fn)}};
            break;
        case ScoreSource::Kind::DecoderLayer:
            src = {{"kind", "decoder_layer"}, {"layer", score.source.layer}};
            break;
        case ScoreSource::Kind::Random:
            src = {{"kind", "random"}, {"seed", score.source.seed}};
            break;
    }
    return nlohmann::json{
        {"n_visual", score.size()}, {"source", src}, {"scores", score.scores}};
}

ImportanceScore importance_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("n_visual") || !j.contains("scores") ||
        !j["scores"].is_array()) {
        throw FormatError("importance_from_json: not a score document");
    }
    ImportanceScore score;
    score.scores = j["scores"].get<std::vector<double>>();
    if (score.scores.empty() || score.scores.size() != j["n_visual"].get<std::size_t>()) {
        throw FormatError("importance_from_json: n_visual does not match scores length");
    }
    for (double s : score.scores) {
        if (!std::isfinite(s) || s < 0.0) {
            throw FormatError("importance_from_json: scores must be finite and non-negative");
        }
    }
    if (j.contains("source") && j["source"].is_object()) {
        const auto& src = j["source"];
        const std::string kind = src.value("kind", "");
        if (kind == "encoder_layer") {
            score.source = {.kind = ScoreSource::Kind::EncoderSingleLayer,
                            .layer = src.value("layer", 0u)};
        } else if (kind == "encoder_ensemble") {
            score.source = {.kind = ScoreSource::Kind::EncoderEnsemble,
                            .ensemble_k = src.value("k", 0u),
                            .ensemble_fn = ensemble_from_string(src.value("ensemble", "avg"))};
        } else if (kind == "decoder_layer") {
            score.source = {.kind = ScoreSource::Kind::DecoderLayer,
                            .layer = src.value("layer", 0u)};
        } else if (kind == "random") {
            score.source = {.kind = ScoreSource::Kind::Random,
                            .seed = src.value("seed", std::uint64_t{0})};
        } else {
            throw FormatError("importance_from_json: unknown source kind");
        }
    }
    return score;
}

}  // namespace vtc
