#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lendtext::baselines {

// Fold id per row, stratified by label: each class is shuffled then dealt
// round-robin so per-fold class counts differ by at most one.
std::vector<int> stratified_folds(std::span<const int> labels, int n_folds, std::uint64_t seed);

// Throws ValidationError unless labels are 0/1 with both classes present.
void check_binary_labels(std::span<const int> labels);

struct CvCandidate {
  nlohmann::json params;
  std::vector<double> fold_auc;
  double mean_auc = 0;
  double std_auc = 0;
};

struct CvSearchReport {
  std::string model;
  int n_folds = 0;
  std::vector<CvCandidate> candidates;
  std::size_t chosen = 0;

  nlohmann::json to_json() const;
};

void summarize(CvCandidate& c);

}  // namespace lendtext::baselines
