#include "lendtext/baselines/cv.hpp"

#include <cmath>
#include <numeric>

#include "lendtext/core/error.hpp"
#include "lendtext/core/rng.hpp"

namespace lendtext::baselines {

void check_binary_labels(std::span<const int> labels) {
  bool pos = false, neg = false;
  for (int y : labels) {
    if (y == 1) {
      pos = true;
    } else if (y == 0) {
      neg = true;
    } else {
      throw ValidationError("labels must be 0 or 1");
    }
  }
  if (!pos || !neg) throw ValidationError("labels contain a single class");
}

std::vector<int> stratified_folds(std::span<const int> labels, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw ValidationError("need at least 2 folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  Rng rng(derive_seed(seed, "folds"));
  shuffle_in_place(pos, rng);
  shuffle_in_place(neg, rng);
  std::vector<int> fold(labels.size());
  // Positives continue the round-robin where negatives stopped so fold sizes stay balanced.
  std::size_t k = 0;
  for (std::size_t i : neg) fold[i] = static_cast<int>(k++ % n_folds);
  for (std::size_t i : pos) fold[i] = static_cast<int>(k++ % n_folds);
  return fold;
}

void summarize(CvCandidate& c) {
  const double n = static_cast<double>(c.fold_auc.size());
  c.mean_auc = std::accumulate(c.fold_auc.begin(), c.fold_auc.end(), 0.0) / n;
  double ss = 0;
  for (double a : c.fold_auc) ss += (a - c.mean_auc) * (a - c.mean_auc);
  c.std_auc = c.fold_auc.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
}

nlohmann::json CvSearchReport::to_json() const {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : candidates) {
    cands.push_back({{"params", c.params},
                     {"mean_auc", c.mean_auc},
                     {"std_auc", c.std_auc},
                     {"fold_auc", c.fold_auc}});
  }
  return {{"format", "lendtext.cv_search"}, {"version", 1},  {"model", model},
          {"folds", n_folds},               {"chosen", chosen}, {"candidates", cands}};
}

}  // namespace lendtext::baselines
