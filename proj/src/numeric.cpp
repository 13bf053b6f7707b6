// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#include "vtc/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "vtc/errors.hpp"

namespace vtc {

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw InvalidInput(std::string(what) + ": non-finite element");
        }
    }
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw InvalidInput("softmax: empty input");
    }
    require_finite(logits, "softmax");

    const double max_logit = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_logit);
        total += out[i];
    }
    for (double& x : out) {
        x /= total;
    }
    return out;
}

std::vector<double> descending_ranks(std::span<const double> scores) {
    if (scores.empty()) {
        throw InvalidInput("descending_ranks: empty input");
    }
    require_finite(scores, "descending_ranks");

    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    // Walk runs of equal scores and hand every member the average of the
    // 1-based positions the run occupies.
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
            ++j;
        }
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = avg_rank;
        }
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw InvalidInput("pearson: length mismatch");
    }
    if (x.size() < 2) {
        throw InvalidInput("pearson: need at least two samples");
    }
    require_finite(x, "pearson");
    require_finite(y, "pearson");

    const std::size_t n = x.size();
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw DegenerateVariance("pearson: constant sequence");
    }
    return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

}  // namespace vtc
