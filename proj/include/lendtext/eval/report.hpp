#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lendtext::eval {

struct PredictionSet {
  std::string model;   // lr | rf | dl
  std::string subset;  // text | structured | combined
  std::string split;   // train | holdout | oot_early | oot_late
  std::vector<std::string> ids;
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<int> word_counts;
  std::vector<std::string> segments;

  std::size_t size() const { return ids.size(); }
  void validate() const;  // aligned lengths, finite scores in [0,1]
  // Rows whose segment tag equals `segment` ("all" keeps everything).
  PredictionSet filter_segment(const std::string& segment) const;

  std::string to_csv() const;
  static PredictionSet from_csv(const std::string& text, std::string model, std::string subset, std::string split);
};

struct MetricReport {
  std::optional<double> auc;             // absent when one class is missing
  std::optional<double> weighted_brier;  // same
  std::size_t n = 0;
  double default_rate = 0;

  nlohmann::json to_json() const;
};

MetricReport compute_metrics(std::span<const double> scores, std::span<const int> labels);

struct WordCountCurve {
  std::vector<double> thresholds;          // descending
  std::vector<std::optional<double>> auc;  // over cases with word count >= threshold
  std::vector<std::size_t> counts;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Deciles of the training word counts plus 0, descending and de-duplicated.
std::vector<double> default_wordcount_thresholds(std::span<const int> train_word_counts);

WordCountCurve auc_by_wordcount(const PredictionSet& preds, std::span<const double> thresholds);

struct CorrelationMatrix {
  std::string segment;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;

  nlohmann::json to_json() const;
};

// Spearman correlation between aligned prediction sets (ids must match).
CorrelationMatrix correlation_matrix(const std::vector<PredictionSet>& sets, const std::string& segment = "all");

struct ReportCell {
  std::string model, subset, split, segment;
  MetricReport metrics;
  bool best_auc = false;    // best model for this (subset, split, segment)
  bool best_brier = false;
};

struct ReportGrid {
  std::vector<ReportCell> cells;

  const ReportCell* find(const std::string& model, const std::string& subset, const std::string& split,
                         const std::string& segment) const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Cells for every set and each of the segments {all, <distinct tags>}.
ReportGrid segment_report(const std::vector<PredictionSet>& sets);

}  // namespace lendtext::eval
