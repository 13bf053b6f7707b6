// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtc/scoring.hpp"
#include "vtc/selection.hpp"
#include "vtc/trace.hpp"

namespace vtc {

// Fraction of shared kept tokens between two same-budget selections:
// |A ∩ B| / U. Symmetric. Throws InvalidComparison when budgets or token
// counts differ.
double overlap_proportion(const TokenSelection& a, const TokenSelection& b);

// Spearman rank correlation as Pearson on descending fractional ranks.
// Budget-independent: every token's rank participates.
double spearman(std::span<const double> a, std::span<const double> b);
double spearman(const ImportanceScore& a, const ImportanceScore& b);

struct LayerConsistency {
    std::uint32_t layer = 0;
    double spearman = 0.0;
    std::vector<double> overlap;  // one entry per evaluated budget
};

// The per-layer encoder-vs-decoder agreement plus its across-layer means.
struct ConsistencyReport {
    std::vector<std::uint32_t> budgets;
    std::uint32_t k = 0;
    EnsembleFn ensemble_fn = EnsembleFn::Avg;
    std::string encoder_source;
    std::string decoder_source;
    std::uint32_t n_visual = 0;

    std::vector<LayerConsistency> per_layer;  // length = decoder L

    double mean_spearman = 0.0;
    double mean_overlap = 0.0;                 // over all (layer, budget) pairs
    std::vector<double> mean_overlap_per_budget;
};

// Compares encoder-ensemble scores (depth K, function fn) against every
// decoder layer's scores: overlap of top-U sets per budget, plus the
// budget-independent rank correlation. Throws TraceMismatch when the
// traces disagree on N_v, RoleError on swapped roles.
ConsistencyReport consistency_report(const AttentionTrace& encoder_trace,
                                     const AttentionTrace& decoder_trace,
                                     std::span<const std::uint32_t> budgets, std::uint32_t k,
                                     EnsembleFn fn);

struct KSweepPoint {
    std::uint32_t k = 0;
    double mean_overlap = 0.0;
    double mean_spearman = 0.0;
};

// One aggregate per K in [k_min, k_max], ascending.
std::vector<KSweepPoint> k_sweep(const AttentionTrace& encoder_trace,
                                 const AttentionTrace& decoder_trace,
                                 std::span<const std::uint32_t> budgets, std::uint32_t k_min,
                                 std::uint32_t k_max, EnsembleFn fn);

// CSV: header "layer,n,U,overlap,spearman", one data row per
// (decoder layer, budget), aggregates appended as '#' comment lines.
void write_report_csv(std::ostream& out, const ConsistencyReport& report);
nlohmann::json to_json(const ConsistencyReport& report);

// CSV: header "k,mean_overlap,mean_spearman", one row per K.
void write_sweep_csv(std::ostream& out, std::span<const KSweepPoint> sweep);
nlohmann::json sweep_to_json(std::span<const KSweepPoint> sweep);

}  // namespace vtc
