#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

namespace lendtext::explain {

// Name of the single text input in importance reports.
inline constexpr const char* kTextFeature = "BERT";

struct FeatureImportance {
  std::string feature;
  double mean_drop = 0;  // over valid repeats
  double std_drop = 0;
  std::vector<std::optional<double>> repeats;  // absent when the metric failed
  bool flagged = false;                        // at least one absent repeat
};

struct PermutationImportanceReport {
  std::vector<FeatureImportance> features;
  double baseline_metric = 0;
  int repeats = 0;
  std::uint64_t seed = 0;

  const FeatureImportance* find(const std::string& name) const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Returns scores with feature `feature` (index into the name list) taken from
// row perm[i] for row i; feature < 0 means no permutation.
using PermutedScorer = std::function<std::vector<double>(int feature, std::span<const std::size_t> perm)>;

// importance(f) = mean over repeats of AUC(original) - AUC(f permuted).
PermutationImportanceReport permutation_importance(const std::vector<std::string>& features,
                                                   const PermutedScorer& scorer, std::span<const int> labels,
                                                   int repeats, std::uint64_t seed);

struct ShiftEntry {
  std::string feature;
  double baseline = 0;
  double combined = 0;
  double delta = 0;  // combined - baseline
};

struct ImportanceShift {
  std::vector<ShiftEntry> entries;  // ascending delta
  const ShiftEntry* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

// The combined report may carry the text feature in addition; any other
// mismatch of structured features throws ValidationError naming the feature.
ImportanceShift importance_shift(const PermutationImportanceReport& base, const PermutationImportanceReport& combined);

struct UncertainCase {
  std::string id;
  double structured = 0;
  double combined = 0;
  int label = 0;
  double improvement = 0;  // |y - s| - |y - c|
};

struct UncertainCaseSelection {
  double lo = 0.4, hi = 0.6;
  std::size_t top_n = 250;
  std::vector<UncertainCase> cases;  // descending improvement, ties by ascending id

  nlohmann::json to_json() const;
};

UncertainCaseSelection select_uncertain_improved(std::span<const std::string> ids,
                                                 std::span<const double> structured,
                                                 std::span<const double> combined, std::span<const int> labels,
                                                 double lo = 0.4, double hi = 0.6, std::size_t top_n = 250);

struct LimeOptions {
  int n_samples = 1000;
  double kernel_width = 0.75;
  double ridge = 1.0;
  std::uint64_t seed = 1;
};

struct WordWeight {
  std::string word;
  double weight = 0;
};

struct LimeExplanation {
  std::string doc_id;
  std::vector<WordWeight> words;  // document order of first occurrence
  double intercept = 0;
  double local_r2 = 0;
  int n_samples = 0;
  double kernel_width = 0;
  double original_score = 0;

  double weight(const std::string& word) const;
  nlohmann::json to_json() const;
};

// Scores a batch of cleaned texts.
using TextScorer = std::function<std::vector<double>(const std::vector<std::string>&)>;

// Word-removal LIME over the distinct word tokens of the cleaned document.
LimeExplanation lime_text(const TextScorer& scorer, const std::string& doc, const LimeOptions& options);

struct WordImpact {
  std::string stem;
  double mean_impact = 0;  // over explanations containing the stem
  std::size_t documents = 0;
};

std::vector<WordImpact> aggregate_word_importance(const std::vector<LimeExplanation>& explanations,
                                                  const std::unordered_set<std::string>& stopwords,
                                                  std::size_t top_k = 20);

}  // namespace lendtext::explain
