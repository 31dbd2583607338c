#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lendtext/baselines/cv.hpp"

namespace lendtext::baselines {

// Penalized logistic regression:
//   (1/n) sum_i [log(1 + exp(eta_i)) - y_i eta_i]
//     + lambda * (l1_ratio * |w|_1 + (1 - l1_ratio) / 2 * |w|_2^2),
// eta = X w + b, intercept unpenalized.
struct ElasticNetModel {
  Eigen::VectorXd w;
  double b = 0;
  double l1_ratio = 1;
  double lambda = 0;

  std::size_t dim() const { return static_cast<std::size_t>(w.size()); }
  nlohmann::json to_json() const;
  static ElasticNetModel from_json(const nlohmann::json& j);
};

struct CoordinateDescentOptions {
  int max_sweeps = 500;      // outer (quadratic model) iterations
  double tolerance = 1e-11;  // max coordinate step (scaled by curvature) at convergence
};

struct FitTrace {
  int sweeps = 0;
  std::vector<double> objective;  // after each outer iteration
};

double elastic_net_objective(const ElasticNetModel& m, const Eigen::MatrixXd& x,
                             std::span<const int> y);

// Proximal Newton: cyclic coordinate descent with soft-thresholding on a
// quadratic model of the loss, then backtracking on the full step so the
// objective never increases.
ElasticNetModel fit_elastic_net(const Eigen::MatrixXd& x, std::span<const int> y, double l1_ratio,
                                double lambda, const ElasticNetModel* warm_start = nullptr,
                                const CoordinateDescentOptions& options = {},
                                FitTrace* trace = nullptr);

// Largest subgradient-condition violation over all coordinates and the intercept.
double kkt_residual(const ElasticNetModel& m, const Eigen::MatrixXd& x, std::span<const int> y);

// Smallest lambda with all weights zero when l1_ratio = 1.
double lambda_max(const Eigen::MatrixXd& x, std::span<const int> y);

// Geometric path from lambda_max down `decades` orders of magnitude.
std::vector<double> lambda_path(const Eigen::MatrixXd& x, std::span<const int> y,
                                int n_lambda = 20, double decades = 3.0);

struct ElasticNetSearch {
  std::vector<double> l1_ratios = {0.0, 0.25, 0.5, 0.75, 1.0};
  int n_lambda = 20;
  double decades = 3.0;
  int folds = 10;
  std::uint64_t seed = 1;
};

std::pair<ElasticNetModel, CvSearchReport> train_elastic_net(const Eigen::MatrixXd& x,
                                                             std::span<const int> y,
                                                             const ElasticNetSearch& search);

std::vector<double> predict_linear(const ElasticNetModel& m, const Eigen::MatrixXd& x);

}  // namespace lendtext::baselines
