// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace vtc {

/// Numerically stable softmax (max subtraction before exponentiation).
/// Output is non-negative and sums to 1; adding a constant to all logits
/// leaves the result unchanged up to rounding.
/// Throws InvalidInput on empty input or non-finite elements.
std::vector<double> softmax(std::span<const double> logits);

/// Descending fractional ranks: the highest score gets rank 1, ties share
/// the average of the ranks they span. The rank sum is always N(N+1)/2.
/// Throws InvalidInput on empty input or non-finite elements.
std::vector<double> descending_ranks(std::span<const double> scores);

/// Pearson correlation coefficient, computed in double with centered sums.
/// Result is clamped to [-1, 1].
/// Throws InvalidInput on length mismatch or length < 2, DegenerateVariance
/// if either sequence is constant.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace vtc
