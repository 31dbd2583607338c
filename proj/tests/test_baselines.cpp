#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "lendtext/baselines/cv.hpp"
#include "lendtext/baselines/elastic_net.hpp"
#include "lendtext/baselines/forest.hpp"
#include "lendtext/baselines/rfecv.hpp"
#include "lendtext/core/error.hpp"
#include "lendtext/core/rng.hpp"
#include "lendtext/eval/metrics.hpp"

using namespace lendtext;
using namespace lendtext::baselines;

namespace {

struct Data {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

Data logistic_data(Eigen::Index n, const std::vector<double>& beta, std::uint64_t seed) {
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(beta.size());
  Data out{Eigen::MatrixXd(n, d), std::vector<int>(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    double eta = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
      out.x(i, j) = standard_normal(rng);
      eta += beta[j] * out.x(i, j);
    }
    out.y[i] = uniform01(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
  }
  return out;
}

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

// Ridge-penalized logistic loss minimized by damped Newton with the full Hessian.
Eigen::VectorXd ridge_oracle(const Eigen::MatrixXd& x, const std::vector<int>& y, double lambda) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::MatrixXd xa(n, d + 1);
  xa << x, Eigen::VectorXd::Ones(n);
  Eigen::VectorXd th = Eigen::VectorXd::Zero(d + 1);
  auto f = [&](const Eigen::VectorXd& t) {
    Eigen::VectorXd eta = xa * t;
    double l = 0;
    for (Eigen::Index i = 0; i < n; ++i) l += softplus(eta[i]) - y[i] * eta[i];
    return l / n + 0.5 * lambda * t.head(d).squaredNorm();
  };
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd eta = xa * th;
    Eigen::VectorXd p = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    Eigen::VectorXd r = p;
    for (Eigen::Index i = 0; i < n; ++i) r[i] -= y[i];
    Eigen::VectorXd g = xa.transpose() * r / n;
    g.head(d) += lambda * th.head(d);
    Eigen::MatrixXd h = xa.transpose() * (p.array() * (1 - p.array())).matrix().asDiagonal() * xa / n;
    h.topLeftCorner(d, d).diagonal().array() += lambda;
    Eigen::VectorXd step = h.ldlt().solve(g);
    double t = 1;
    while (f(th - t * step) > f(th) - 1e-4 * t * g.dot(step) && t > 1e-12) t *= 0.5;
    th -= t * step;
    if (t * step.lpNorm<Eigen::Infinity>() < 1e-14) break;
  }
  return th;
}

}  // namespace

TEST(ElasticNet, RidgeMatchesNewtonOracle) {
  auto data = logistic_data(20, {1.0, -0.5, 0.8}, 3);
  for (double lambda : {0.05, 0.5}) {
    auto m = fit_elastic_net(data.x, data.y, 0.0, lambda);
    auto oracle = ridge_oracle(data.x, data.y, lambda);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(m.w[j], oracle[j], 1e-4);
    EXPECT_NEAR(m.b, oracle[3], 1e-4);
    EXPECT_LT(kkt_residual(m, data.x, data.y), 1e-6);
  }
}

TEST(ElasticNet, KktHoldsAlongPathAndObjectiveMonotone) {
  auto data = logistic_data(200, {1.5, 0, -1, 0, 0.5}, 4);
  for (double a : {0.25, 0.5, 1.0}) {
    for (double lambda : lambda_path(data.x, data.y, 6, 2.0)) {
      FitTrace trace;
      auto m = fit_elastic_net(data.x, data.y, a, lambda, nullptr, {}, &trace);
      EXPECT_LT(kkt_residual(m, data.x, data.y), 1e-6);
      for (std::size_t i = 1; i < trace.objective.size(); ++i)
        EXPECT_LE(trace.objective[i], trace.objective[i - 1] + 1e-15);
    }
  }
}

TEST(ElasticNet, FullShrinkageGivesInterceptOnly) {
  auto data = logistic_data(100, {1, 1}, 5);
  double mean = 0;
  for (int v : data.y) mean += v;
  mean /= 100.0;
  for (double a : {0.0, 0.5, 1.0}) {
    auto m = fit_elastic_net(data.x, data.y, a, 1e6);
    EXPECT_LT(m.w.cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_NEAR(m.b, std::log(mean / (1 - mean)), 1e-5);
  }
  auto at_max = fit_elastic_net(data.x, data.y, 1.0, lambda_max(data.x, data.y));
  EXPECT_EQ(at_max.w.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ElasticNet, SeparableDataRanksPerfectly) {
  Eigen::MatrixXd x(10, 1);
  std::vector<int> y(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = i - 4.5;
    y[i] = i >= 5;
  }
  auto m = fit_elastic_net(x, y, 0.5, 1e-3);
  EXPECT_DOUBLE_EQ(eval::auc(predict_linear(m, x), y), 1.0);
}

TEST(ElasticNet, PredictionArithmetic) {
  ElasticNetModel m;
  m.w = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 2);
  for (double p : predict_linear(m, x)) EXPECT_DOUBLE_EQ(p, 0.5);
  m.b = 10;
  EXPECT_NEAR(predict_linear(m, x)[0], 0.99995, 1e-5);
  m.b = 0;
  m.w << 1.0, 0.0;
  Eigen::MatrixXd lo(1, 2), hi(1, 2);
  lo << 0.1, 0.3;
  hi << 0.2, 0.3;
  EXPECT_LT(predict_linear(m, lo)[0], predict_linear(m, hi)[0]);
}

TEST(ElasticNet, SearchPicksCandidateAndRoundTrips) {
  auto data = logistic_data(300, {1, -1, 0}, 6);
  ElasticNetSearch s;
  s.l1_ratios = {0.0, 1.0};
  s.n_lambda = 5;
  s.folds = 3;
  auto [m, report] = train_elastic_net(data.x, data.y, s);
  EXPECT_EQ(report.candidates.size(), 10u);
  EXPECT_LT(report.chosen, report.candidates.size());
  auto back = ElasticNetModel::from_json(m.to_json());
  EXPECT_EQ(predict_linear(back, data.x), predict_linear(m, data.x));
}

TEST(Cv, StratifiedFoldsBalanceClasses) {
  std::vector<int> y(103, 0);
  for (int i = 0; i < 31; ++i) y[i] = 1;
  auto folds = stratified_folds(y, 10, 3);
  std::vector<int> pos(10, 0), all(10, 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    pos[folds[i]] += y[i];
    all[folds[i]] += 1;
  }
  EXPECT_LE(*std::max_element(pos.begin(), pos.end()) - *std::min_element(pos.begin(), pos.end()), 1);
  EXPECT_LE(*std::max_element(all.begin(), all.end()) - *std::min_element(all.begin(), all.end()), 2);
  EXPECT_THROW(check_binary_labels(std::vector<int>{1, 1}), ValidationError);
}

TEST(Forest, LearnsXorAtDepthTwo) {
  Rng rng(8);
  Eigen::MatrixXd x(400, 2);
  std::vector<int> y(400);
  for (int i = 0; i < 400; ++i) {
    int a = uniform01(rng) < 0.5, b = uniform01(rng) < 0.5;
    x(i, 0) = a;
    x(i, 1) = b;
    y[i] = a ^ b;
  }
  ForestParams p;
  p.n_trees = 100;
  p.max_features = 2;
  p.max_depth = 2;
  auto deep = fit_forest(x, y, p);
  EXPECT_GT(eval::auc(deep.predict_proba(x), y), 0.95);
  p.max_depth = 1;
  EXPECT_LT(eval::auc(fit_forest(x, y, p).predict_proba(x), y), 0.75);
}

TEST(Forest, PureLeavesAndMeanOfTrees) {
  Eigen::MatrixXd x(8, 1);
  std::vector<int> y(8);
  for (int i = 0; i < 8; ++i) {
    x(i, 0) = i;
    y[i] = i >= 4;
  }
  ForestParams p;
  p.n_trees = 20;
  auto f = fit_forest(x, y, p);
  auto probs = f.predict_proba(x);
  EXPECT_DOUBLE_EQ(eval::auc(probs, y), 1.0);
  for (int i = 0; i < 8; ++i) {
    double mean = 0;
    for (const auto& t : f.trees) mean += t.predict(x.data() + i, x.rows());
    EXPECT_NEAR(probs[i], mean / f.trees.size(), 1e-15);
  }
}

TEST(Forest, DeterministicAcrossThreadCountsAndRoundTrip) {
  auto data = logistic_data(300, {1, -1, 0.5, 0}, 9);
  ForestParams p;
  p.n_trees = 30;
  p.threads = 1;
  auto a = fit_forest(data.x, data.y, p);
  p.threads = 3;
  auto b = fit_forest(data.x, data.y, p);
  EXPECT_EQ(a.predict_proba(data.x), b.predict_proba(data.x));
  EXPECT_EQ(ForestModel::from_json(a.to_json()).predict_proba(data.x), a.predict_proba(data.x));
}

TEST(Rfecv, PlantedInformativeFeatures) {
  auto data = logistic_data(1000, {2.0, -1.8, 1.6, -1.4, 1.2, 0, 0, 0, 0, 0}, 21);
  std::vector<std::string> names;
  for (int j = 0; j < 10; ++j) names.push_back("f" + std::to_string(j));
  RfecvOptions opt;
  opt.one_standard_error = true;
  auto r = rfecv_select(data.x, data.y, names, opt);
  int inf = 0, noise = 0;
  for (auto c : r.selected) (c < 5 ? inf : noise)++;
  EXPECT_GE(inf, 4);
  EXPECT_LE(noise, 1);
  EXPECT_EQ(r.mean_auc.size(), 10u);
}

TEST(Rfecv, NoiseDroppedFirstInFolds) {
  auto data = logistic_data(600, {2.0, 0.0}, 22);
  RfecvOptions opt;
  opt.n_trees = 50;
  auto r = rfecv_select(data.x, data.y, {"signal", "noise"}, opt);
  int noise_first = 0;
  for (const auto& order : r.fold_elimination_orders) noise_first += order.front() == 1;
  EXPECT_GE(noise_first, 9);
}

TEST(Rfecv, ToleranceOneSelectsSingleFeature) {
  auto data = logistic_data(300, {1, 1, 1}, 23);
  RfecvOptions opt;
  opt.tolerance = 1.0;
  opt.folds = 3;
  opt.n_trees = 20;
  EXPECT_EQ(rfecv_select(data.x, data.y, {"a", "b", "c"}, opt).selected.size(), 1u);
}
