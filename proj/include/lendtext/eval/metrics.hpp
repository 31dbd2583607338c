#pragma once

#include <span>
#include <vector>

namespace lendtext::eval {

// Probability that a random positive outranks a random negative, ties
// counted 1/2 (rank-sum with average ranks). Throws ValidationError unless
// both classes are present.
double auc(std::span<const double> scores, std::span<const int> labels);

// Class-balanced Brier score: each class contributes half the total weight.
double weighted_brier(std::span<const double> scores, std::span<const int> labels);

// Pearson correlation of average ranks. Throws on constant input.
double spearman_rank_corr(std::span<const double> a, std::span<const double> b);

// 1-based average ranks (ties share the mean of their positions).
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace lendtext::eval
