// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#include "vtc/diagnostics.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "vtc/errors.hpp"
#include "vtc/numeric.hpp"

namespace vtc {

namespace {

void require_roles(const AttentionTrace& enc, const AttentionTrace& dec) {
    if (enc.role != TraceRole::Encoder) {
        throw RoleError("consistency: first trace must be an encoder trace");
    }
    if (dec.role != TraceRole::Decoder) {
        throw RoleError("consistency: second trace must be a decoder trace");
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

double overlap_proportion(const TokenSelection& a, const TokenSelection& b) {
    if (a.budget != b.budget) {
        throw InvalidComparison("overlap_proportion: budgets differ");
    }
    if (a.n_visual != b.n_visual) {
        throw InvalidComparison("overlap_proportion: selections come from different N_v");
    }
    std::size_t shared = 0;
    auto it_a = a.kept.begin();
    auto it_b = b.kept.begin();
    while (it_a != a.kept.end() && it_b != b.kept.end()) {
        if (*it_a == *it_b) {
            ++shared;
            ++it_a;
            ++it_b;
        } else if (*it_a < *it_b) {
            ++it_a;
        } else {
            ++it_b;
        }
    }
    return static_cast<double>(shared) / static_cast<double>(a.budget);
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InvalidInput("spearman: length mismatch");
    }
    const auto ranks_a = descending_ranks(a);
    const auto ranks_b = descending_ranks(b);
    return pearson(ranks_a, ranks_b);
}

double spearman(const ImportanceScore& a, const ImportanceScore& b) {
    return spearman(std::span<const double>(a.scores), std::span<const double>(b.scores));
}

ConsistencyReport consistency_report(const AttentionTrace& encoder_trace,
                                     const AttentionTrace& decoder_trace,
                                     std::span<const std::uint32_t> budgets, std::uint32_t k,
                                     EnsembleFn fn) {
    require_roles(encoder_trace, decoder_trace);
    if (encoder_trace.num_visual_tokens != decoder_trace.num_visual_tokens) {
        throw TraceMismatch("consistency_report: traces disagree on N_v");
    }
    if (budgets.empty()) {
        throw InvalidInput("consistency_report: need at least one budget");
    }
    for (std::uint32_t u : budgets) {
        if (u == 0) {
            throw InvalidBudget("consistency_report: budget must be >= 1");
        }
    }

    const ImportanceScore enc_scores = encoder_ensemble_importance(encoder_trace, k, fn);
    std::vector<TokenSelection> enc_selections;
    enc_selections.reserve(budgets.size());
    for (std::uint32_t u : budgets) {
        enc_selections.push_back(top_u(enc_scores, u));
    }

    ConsistencyReport report;
    report.budgets.assign(budgets.begin(), budgets.end());
    report.k = k;
    report.ensemble_fn = fn;
    report.encoder_source = enc_scores.source.label();
    report.decoder_source = "decoder_layer(head+output mean)";
    report.n_visual = encoder_trace.num_visual_tokens;
    report.mean_overlap_per_budget.assign(budgets.size(), 0.0);

    for (std::uint32_t n = 0; n < decoder_trace.num_layers; ++n) {
        const ImportanceScore dec_scores = decoder_layer_importance(decoder_trace, n);
        LayerConsistency layer;
        layer.layer = n;
        // The rank correlation uses the full score vectors, so it is
        // computed once per layer and shared by every budget.
        layer.spearman = spearman(enc_scores, dec_scores);
        layer.overlap.reserve(budgets.size());
        for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
            const double p =
                overlap_proportion(enc_selections[bi], top_u(dec_scores, budgets[bi]));
            layer.overlap.push_back(p);
            report.mean_overlap_per_budget[bi] += p;
        }
        report.mean_spearman += layer.spearman;
        report.per_layer.push_back(std::move(layer));
    }

    const double n_layers = static_cast<double>(decoder_trace.num_layers);
    report.mean_spearman /= n_layers;
    for (double& m : report.mean_overlap_per_budget) {
        m /= n_layers;
        report.mean_overlap += m;
    }
    report.mean_overlap /= static_cast<double>(budgets.size());
    return report;
}

std::vector<KSweepPoint> k_sweep(const AttentionTrace& encoder_trace,
                                 const AttentionTrace& decoder_trace,
                                 std::span<const std::uint32_t> budgets, std::uint32_t k_min,
                                 std::uint32_t k_max, EnsembleFn fn) {
    if (k_min < 1 || k_min > k_max) {
        throw InvalidK("k_sweep: need 1 <= k_min <= k_max");
    }
    if (encoder_trace.num_layers < 2 || k_max > encoder_trace.num_layers - 1) {
        throw InvalidK("k_sweep: K range exceeds encoder depth");
    }
    std::vector<KSweepPoint> sweep;
    sweep.reserve(k_max - k_min + 1);
    for (std::uint32_t k = k_min; k <= k_max; ++k) {
        const ConsistencyReport report =
            consistency_report(encoder_trace, decoder_trace, budgets, k, fn);
        sweep.push_back({k, report.mean_overlap, report.mean_spearman});
    }
    return sweep;
}

void write_report_csv(std::ostream& out, const ConsistencyReport& report) {
    out << "layer,n,U,overlap,spearman\n";
    for (const LayerConsistency& layer : report.per_layer) {
        for (std::size_t bi = 0; bi < report.budgets.size(); ++bi) {
            out << "decoder," << layer.layer << ',' << report.budgets[bi] << ','
                << format_double(layer.overlap[bi]) << ',' << format_double(layer.spearman)
                << '\n';
        }
    }
    out << "# aggregates: mean_overlap=" << format_double(report.mean_overlap)
        << ",mean_spearman=" << format_double(report.mean_spearman) << '\n';
    for (std::size_t bi = 0; bi < report.budgets.size(); ++bi) {
        out << "# mean_overlap[U=" << report.budgets[bi]
            << "]=" << format_double(report.mean_overlap_per_budget[bi]) << '\n';
    }
}

nlohmann::json to_json(const ConsistencyReport& report) {
    nlohmann::json per_layer = nlohmann::json::array();
    for (const LayerConsistency& layer : report.per_layer) {
        nlohmann::json overlap;
        for (std::size_t bi = 0; bi < report.budgets.size(); ++bi) {
            overlap[std::to_string(report.budgets[bi])] = layer.overlap[bi];
        }
        per_layer.push_back({{"layer", layer.layer},
                             {"spearman", layer.spearman},
                             {"overlap", overlap}});
    }
    nlohmann::json mean_overlap_per_budget;
    for (std::size_t bi = 0; bi < report.budgets.size(); ++bi) {
        mean_overlap_per_budget[std::to_string(report.budgets[bi])] =
            report.mean_overlap_per_budget[bi];
    }
    return nlohmann::json{
        {"config",
         {{"budgets", report.budgets},
          {"k", report.k},
          {"ensemble", to_string(report.ensemble_fn)},
          {"encoder_source", report.encoder_source},
          {"decoder_source", report.decoder_source},
          {"n_visual", report.n_visual}}},
        {"per_layer", per_layer},
        {"aggregates",
         {{"mean_overlap", report.mean_overlap},
          {"mean_spearman", report.mean_spearman},
          {"mean_overlap_per_budget", mean_overlap_per_budget}}}};
}

void write_sweep_csv(std::ostream& out, std::span<const KSweepPoint> sweep) {
    out << "k,mean_overlap,mean_spearman\n";
    for (const KSweepPoint& point : sweep) {
        out << point.k << ',' << format_double(point.mean_overlap) << ','
            << format_double(point.mean_spearman) << '\n';
    }
}

nlohmann::json sweep_to_json(std::span<const KSweepPoint> sweep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const KSweepPoint& point : sweep) {
        rows.push_back({{"k", point.k},
                        {"mean_overlap", point.mean_overlap},
                        {"mean_spearman", point.mean_spearman}});
    }
    return nlohmann::json{{"k_sweep", rows}};
}

}  // namespace vtc
