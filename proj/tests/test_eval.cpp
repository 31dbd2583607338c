#include <gtest/gtest.h>

#include <cmath>

#include "lendtext/core/error.hpp"
#include "lendtext/core/rng.hpp"
#include "lendtext/eval/metrics.hpp"
#include "lendtext/eval/report.hpp"

using namespace lendtext;
using namespace lendtext::eval;

namespace {

// Direct pair enumeration.
double pair_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double hits = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1;
        hits += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return hits / pairs;
}

PredictionSet toy_set() {
  PredictionSet p;
  p.model = "lr";
  p.subset = "text";
  p.split = "holdout";
  p.ids = {"1", "2", "3", "4", "5", "6"};
  p.scores = {0.9, 0.2, 0.6, 0.4, 0.7, 0.1};
  p.labels = {1, 0, 0, 1, 1, 0};
  p.word_counts = {50, 50, 50, 5, 5, 5};
  p.segments = {"new", "new", "existing", "existing", "new", "existing"};
  return p;
}

}  // namespace

TEST(Auc, PerfectConstantAndHandExample) {
  std::vector<int> y = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0, 0, 1, 1}, y), 1.0);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, y), 0.5);
  std::vector<double> s = {0.1, 0.4, 0.35, 0.8};
  EXPECT_DOUBLE_EQ(pair_auc(s, y), 0.75);
  EXPECT_DOUBLE_EQ(auc(s, y), 0.75);
  EXPECT_THROW(auc(s, std::vector<int>{1, 1, 1, 1}), ValidationError);
}

TEST(Auc, MatchesPairEnumerationWithTies) {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    std::size_t n = 3 + uniform_index(rng, 30);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(uniform01(rng) * 4) / 4;
      y[i] = i < 2 ? static_cast<int>(i) : (uniform01(rng) < 0.5);
    }
    EXPECT_NEAR(auc(s, y), pair_auc(s, y), 1e-12);
  }
}

TEST(Brier, HandValuesAndImbalanceInvariance) {
  EXPECT_DOUBLE_EQ(weighted_brier(std::vector<double>{0, 1}, std::vector<int>{0, 1}), 0.0);
  EXPECT_NEAR(weighted_brier(std::vector<double>{0.2, 0.9}, std::vector<int>{0, 1}), 0.025, 1e-15);
  std::vector<double> half(10, 0.5);
  std::vector<int> skew = {1, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_NEAR(weighted_brier(half, skew), 0.25, 1e-15);
}

TEST(Spearman, IdentityReverseAndHandExample) {
  std::vector<double> a = {1, 2, 3, 4};
  EXPECT_NEAR(spearman_rank_corr(a, a), 1.0, 1e-15);
  EXPECT_NEAR(spearman_rank_corr(a, std::vector<double>{4, 3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(spearman_rank_corr(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}), 0.5, 1e-15);
  EXPECT_EQ(average_ranks(std::vector<double>{5, 1, 5}), (std::vector<double>{2.5, 1, 2.5}));
}

TEST(WordCount, ThresholdZeroAndSubsets) {
  auto p = toy_set();
  std::vector<double> th = {100, 40, 0};
  auto curve = auc_by_wordcount(p, th);
  EXPECT_FALSE(curve.auc[0].has_value());
  EXPECT_EQ(curve.counts[0], 0u);
  EXPECT_EQ(*curve.auc[2], auc(p.scores, p.labels));

  // Rows with word count >= 40: scores {0.9, 0.2, 0.6}, labels {1, 0, 0}.
  EXPECT_DOUBLE_EQ(*curve.auc[1], pair_auc({0.9, 0.2, 0.6}, {1, 0, 0}));
  EXPECT_EQ(curve.counts[1], 3u);
}

TEST(WordCount, DefaultThresholdsAreDescendingDecilesPlusZero) {
  std::vector<int> wc;
  for (int i = 1; i <= 100; ++i) wc.push_back(i);
  auto th = default_wordcount_thresholds(wc);
  EXPECT_EQ(th.back(), 0.0);
  for (std::size_t i = 1; i < th.size(); ++i) EXPECT_LT(th[i], th[i - 1]);
}

TEST(Report, SingleCellEqualsDirectMetrics) {
  auto p = toy_set();
  auto grid = segment_report({p});
  const auto* cell = grid.find("lr", "text", "holdout", "all");
  ASSERT_NE(cell, nullptr);
  EXPECT_EQ(*cell->metrics.auc, auc(p.scores, p.labels));
  EXPECT_EQ(*cell->metrics.weighted_brier, weighted_brier(p.scores, p.labels));
  const auto* n = grid.find("lr", "text", "holdout", "new");
  const auto* e = grid.find("lr", "text", "holdout", "existing");
  ASSERT_TRUE(n && e);
  EXPECT_EQ(n->metrics.n + e->metrics.n, p.size());
  EXPECT_EQ(segment_report({p}).to_json(), grid.to_json());
}

TEST(Report, BestFlagsPerSubset) {
  auto a = toy_set();
  auto b = toy_set();
  b.model = "rf";
  b.scores = {0.9, 0.1, 0.2, 0.8, 0.7, 0.3};
  auto grid = segment_report({a, b});
  EXPECT_TRUE(grid.find("rf", "text", "holdout", "all")->best_auc);
  EXPECT_FALSE(grid.find("lr", "text", "holdout", "all")->best_auc);
}

TEST(PredictionSetIo, CsvRoundTripAndValidation) {
  auto p = toy_set();
  auto back = PredictionSet::from_csv(p.to_csv(), p.model, p.subset, p.split);
  EXPECT_EQ(back.ids, p.ids);
  EXPECT_EQ(back.scores, p.scores);
  EXPECT_EQ(back.labels, p.labels);
  p.scores[0] = 1.5;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Correlation, IdenticalSetsCorrelateFully) {
  auto a = toy_set();
  auto b = toy_set();
  b.model = "rf";
  auto m = correlation_matrix({a, b});
  ASSERT_EQ(m.values.size(), 2u);
  EXPECT_NEAR(m.values[0][1], 1.0, 1e-15);
}
