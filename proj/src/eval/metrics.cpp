#include "lendtext/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lendtext/core/error.hpp"

namespace lendtext::eval {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

void check(std::span<const double> scores, std::span<const int> labels, const char* what,
           std::size_t& n_pos, std::size_t& n_neg) {
  if (scores.size() != labels.size()) {
    throw ValidationError(std::string(what) + ": scores and labels differ in length");
  }
  n_pos = n_neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++n_pos;
    } else if (labels[i] == 0) {
      ++n_neg;
    } else {
      throw ValidationError(std::string(what) + ": labels must be 0 or 1");
    }
    if (!std::isfinite(scores[i])) throw ValidationError(std::string(what) + ": non-finite score");
  }
  if (n_pos == 0 || n_neg == 0) {
    throw ValidationError(std::string(what) + ": both classes must be present");
  }
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  std::size_t n_pos, n_neg;
  check(scores, labels, "auc", n_pos, n_neg);
  auto ranks = average_ranks(scores);
  double rank_sum = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 1) rank_sum += ranks[i];
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double weighted_brier(std::span<const double> scores, std::span<const int> labels) {
  std::size_t n_pos, n_neg;
  check(scores, labels, "weighted_brier", n_pos, n_neg);
  // w_i = 1 / (2 * prior(y_i)): both classes carry equal total weight.
  const double n = static_cast<double>(labels.size());
  const double w_pos = n / (2.0 * static_cast<double>(n_pos));
  const double w_neg = n / (2.0 * static_cast<double>(n_neg));
  double num = 0, den = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double w = labels[i] == 1 ? w_pos : w_neg;
    double e = scores[i] - labels[i];
    num += w * e * e;
    den += w;
  }
  return num / den;
}

double spearman_rank_corr(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ValidationError("spearman_rank_corr: need equal lengths >= 2");
  }
  auto ra = average_ranks(a);
  auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    double da = ra[i] - ma, db = rb[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0 || sbb == 0) throw ValidationError("spearman_rank_corr: constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace lendtext::eval
