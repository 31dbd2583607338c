#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lendtext/baselines/forest.hpp"

namespace lendtext::baselines {

struct RfecvOptions {
  int folds = 10;
  double tolerance = 0.0;
  // Widens the tolerance to the standard error of the fold AUCs at the best count.
  bool one_standard_error = false;
  int n_trees = 100;
  int max_depth = 8;
  int threads = 1;
  std::uint64_t seed = 1;
};

struct RfecvReport {
  std::vector<std::string> feature_names;
  // Column indices in the order they were dropped on the full training data;
  // the last entry is the final survivor.
  std::vector<std::size_t> elimination_order;
  std::vector<std::vector<std::size_t>> fold_elimination_orders;
  // mean_auc[c - 1] is the mean CV AUC with c features retained.
  std::vector<double> mean_auc;
  std::vector<std::vector<double>> fold_auc;  // [fold][c - 1]
  std::vector<std::size_t> selected;          // sorted column indices
  double tolerance = 0;  // effective tolerance used for the selection

  nlohmann::json to_json() const;
};

// Recursive elimination by forest impurity importance, scored by CV AUC.
// Selects the minimal feature count whose mean AUC >= max - tolerance.
RfecvReport rfecv_select(const Eigen::MatrixXd& x, std::span<const int> y,
                         const std::vector<std::string>& feature_names, const RfecvOptions& options);

}  // namespace lendtext::baselines
