#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lendtext/baselines/elastic_net.hpp"
#include "lendtext/baselines/forest.hpp"
#include "lendtext/baselines/rfecv.hpp"
#include "lendtext/core/dataset.hpp"
#include "lendtext/core/preprocess.hpp"
#include "lendtext/core/split.hpp"
#include "lendtext/eval/report.hpp"
#include "lendtext/explain/explain.hpp"
#include "lendtext/neural/models.hpp"
#include "lendtext/pipeline/config.hpp"
#include "lendtext/text/lsa.hpp"
#include "lendtext/text/token_encoder.hpp"

namespace lendtext::pipeline {

enum class ModelKind { LR, RF, DL };
enum class Subset { Text, Structured, Combined };

std::string to_string(ModelKind m);
std::string to_string(Subset s);
ModelKind parse_model(const std::string& s);
Subset parse_subset(const std::string& s);
inline constexpr ModelKind kAllModels[] = {ModelKind::LR, ModelKind::RF, ModelKind::DL};
inline constexpr Subset kAllSubsets[] = {Subset::Text, Subset::Structured, Subset::Combined};

// Fitted preprocessing plus per-record encodings in dataset order.
struct Prepared {
  Dataset dataset;
  DataSplits splits;
  ScalerParams scaler;
  CategoryCodec codec;
  text::LsaModel lsa;
  text::TokenVocabulary tokens;
  std::vector<std::string> stopwords;
  std::vector<double> wordcount_thresholds;
  std::size_t max_length = 128;

  std::vector<std::string> structured_names;  // continuous then categorical
  Eigen::MatrixXd structured;  // scaled continuous, then codes / n in [0, 1]
  Eigen::MatrixXd concepts;    // LSA projections
  neural::StructuredInput dl_structured;
  neural::Corpus corpus;
  std::vector<int> labels;
  std::vector<int> word_counts;
  std::vector<std::string> ids;
  std::vector<std::string> segments;

  std::size_t n_categorical() const { return dataset.schema.categorical_names.size(); }
  std::size_t n_continuous() const { return dataset.schema.continuous_names.size(); }

  text::TokenSequence encode_text(const std::string& raw) const;
  // Standalone encodings of a raw text (used for perturbed documents).
  Eigen::VectorXd concepts_of(const std::string& raw) const;
};

// Fits preprocessing on the training split.
Prepared prepare(Dataset dataset, const RunConfig& config);

// Rebuilds encodings from already-fitted preprocessing.
Prepared reencode(Dataset dataset, DataSplits splits, ScalerParams scaler, CategoryCodec codec, text::LsaModel lsa,
                  text::TokenVocabulary tokens, std::vector<std::string> stopwords,
                  std::vector<double> thresholds, std::size_t max_length);

std::vector<int> gather_labels(const Prepared& p, const std::vector<std::size_t>& rows);

// A trained model for one (model, subset) cell.
class AnyModel {
 public:
  ModelKind kind = ModelKind::LR;
  Subset subset = Subset::Structured;
  std::vector<std::size_t> structured_columns;  // baseline models only
  std::optional<baselines::ElasticNetModel> lr;
  std::optional<baselines::ForestModel> rf;
  std::optional<neural::MlpStructuredModel> dl_structured;
  std::optional<neural::TextModel> dl_text;
  std::optional<neural::CombinedModel> dl_combined;
  nlohmann::json training_report;

  std::string tag() const { return to_string(kind) + "_" + to_string(subset); }

  std::vector<double> predict(const Prepared& p, const std::vector<std::size_t>& rows) const;

  // Input features in importance order: structured names, then the text feature.
  std::vector<std::string> feature_names(const Prepared& p) const;

  // Scores rows with one feature permuted (PermutedScorer contract).
  explain::PermutedScorer permuted_scorer(const Prepared& p, const std::vector<std::size_t>& rows) const;

  // Scores perturbed versions of the text of record `row`, structured inputs fixed.
  explain::TextScorer text_scorer(const Prepared& p, std::size_t row) const;

  nlohmann::json to_json();
  static AnyModel from_json(const nlohmann::json& j);
};

Eigen::MatrixXd baseline_design(const Prepared& p, Subset subset, const std::vector<std::size_t>& columns,
                                const std::vector<std::size_t>& rows);

baselines::RfecvReport run_rfecv(const Prepared& p, const RunConfig& config);

AnyModel train_baseline(const Prepared& p, ModelKind kind, Subset subset, const std::vector<std::size_t>& columns,
                        const RunConfig& config);

AnyModel train_dl_structured(const Prepared& p, const RunConfig& config);
AnyModel train_dl_text(const Prepared& p, const RunConfig& config);
AnyModel train_dl_combined(const Prepared& p, const AnyModel& structured, const AnyModel& text,
                           const RunConfig& config);

eval::PredictionSet prediction_set(const Prepared& p, const AnyModel& model, SplitName split);

}  // namespace lendtext::pipeline
