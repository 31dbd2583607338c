#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lendtext/baselines/cv.hpp"

namespace lendtext::baselines {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;  // row goes left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double probability = 0;  // leaf: mean training label
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  int depth = 0;

  double predict(const double* row, Eigen::Index stride) const;
};

struct ForestParams {
  int n_trees = 300;
  int max_depth = 10;
  int max_features = 0;  // 0: round(sqrt(d))
  int min_samples_leaf = 1;
  int n_bins = 64;
  int threads = 1;
  std::uint64_t seed = 1;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  ForestParams params;
  std::size_t n_features = 0;
  std::vector<double> impurity_importance;  // mean decrease in Gini, normalized to sum 1

  // Mean of per-tree leaf probabilities.
  std::vector<double> predict_proba(const Eigen::MatrixXd& x) const;

  nlohmann::json to_json() const;
  static ForestModel from_json(const nlohmann::json& j);
};

// Bootstrap per tree, max_features candidates per split, Gini impurity,
// candidate thresholds at training quantiles. Deterministic given the seed
// regardless of the thread count.
ForestModel fit_forest(const Eigen::MatrixXd& x, std::span<const int> y, const ForestParams& params);

struct ForestSearch {
  std::vector<int> max_depth = {3, 5, 8, 12};
  std::vector<int> max_features = {0};  // 0 expands to sqrt(d); extra values are absolute
  std::vector<double> max_features_fraction = {0.2, 0.4};
  int n_candidates = 6;
  int folds = 10;
  int n_trees = 300;
  int threads = 1;
  std::uint64_t seed = 1;
};

std::pair<ForestModel, CvSearchReport> train_random_forest(const Eigen::MatrixXd& x,
                                                           std::span<const int> y,
                                                           const ForestSearch& search);

}  // namespace lendtext::baselines
