#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lendtext/core/dataset.hpp"

namespace lendtext::synth {

// Generator settings. Loaded from the [synth] section of a run config; every
// field has a default.
struct SynthConfig {
  std::size_t n_records = 5000;
  double default_rate_new = 0.20;
  double default_rate_existing = 0.11;
  double existing_fraction = 0.5;

  int first_cohort = 2008;
  int last_cohort = 2014;
  double early_cohort_weight = 0.05;  // share of records in the first cohort
  double late_cohort_weight = 0.15;   // share of records in the last cohort

  double structured_signal = 1.4;  // sd of the structured part of the default logit
  double text_signal = 1.3;        // logit coefficient of the text-only latent
  double overlap = 0.0;            // fraction of the text latent that duplicates a structured feature
  double keyword_noise = 0.6;      // per-slot noise on keyword choice

  // Bimodal word counts: a short mode (a sentence or two) and a long mode.
  double short_fraction = 0.35;
  double short_median_words = 9.0;
  double long_median_words = 55.0;
  double length_sigma = 0.45;
  int max_words = 400;
  double words_per_slot = 12.0;  // one keyword slot per this many words

  bool drift = false;                 // late cohort: shorter texts, shifted means
  double drift_length_scale = 0.3;
  double drift_mean_shift = 0.6;

  std::uint64_t seed = 7;
  std::uint64_t text_seed = 0;  // 0: derived from seed

  // Throws ConfigError listing every violation.
  void validate() const;
};

// Desk schema produced by the generator.
FeatureSchema default_schema();

// Feature whose latent value the text duplicates when overlap > 0.
inline constexpr const char* kOverlapFeature = "payment_history";
// Structured features with no effect on the label.
std::vector<std::string> noise_features();
// Features with a nonzero effect on the label.
std::vector<std::string> informative_features();

// Planted keywords: strongest risk/safe words, and the generic lists.
inline constexpr const char* kPlantedRiskKeyword = "informal";
inline constexpr const char* kPlantedSafeKeyword = "strengths";
const std::vector<std::string>& risk_keywords();
const std::vector<std::string>& safe_keywords();
const std::vector<std::string>& stopwords();
// Every word the generator can emit, sorted.
std::vector<std::string> vocabulary();

// Signal keywords of a document in order of appearance.
std::vector<std::string> keyword_profile(const std::string& text);

Dataset generate_synthetic(const SynthConfig& config);

// Word tokens (punctuation excluded).
std::size_t word_count(const std::string& text);

}  // namespace lendtext::synth
