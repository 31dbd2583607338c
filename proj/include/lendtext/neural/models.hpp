#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lendtext/neural/encoder.hpp"
#include "lendtext/neural/structured.hpp"

namespace lendtext::neural {

using Corpus = std::vector<text::TokenSequence>;

// Encoder pooled output -> Dense(d, hidden) -> GELU -> Dense(hidden, 1).
class TextModel {
 public:
  TextModel() = default;
  TextModel(TransformerEncoder encoder, int head_hidden, std::uint64_t seed);

  TransformerEncoder& encoder() { return encoder_; }
  const TransformerEncoder& encoder() const { return encoder_; }
  ParamList head_params();
  ParamList params();

  double logit_from_pooled(const Matrix& pooled) const;
  std::vector<double> predict(const Corpus& docs) const;

  // Loss gradient through head and (optionally) encoder for a batch.
  double accumulate_batch(const Corpus& docs, std::span<const std::size_t> idx, std::span<const int> y,
                          bool through_encoder, const std::vector<Matrix>* cached_pooled);

  nlohmann::json to_json();
  static TextModel from_json(const nlohmann::json& j);

 private:
  TransformerEncoder encoder_;
  Dense h1_, h2_;
};

struct FineTuneOptions {
  int unfreeze_last_k = 2;
  double lr = 5e-4;
  int epochs = 5;
  int batch_size = 32;
  std::uint64_t seed = 1;
};

// Head plus the last k encoder blocks are trained; everything else is frozen.
FitReport fine_tune_text(TextModel& model, const Corpus& docs, std::span<const int> y, const FineTuneOptions& options);

struct CombinedInput {
  StructuredInput structured;
  Corpus text;

  std::size_t rows() const { return text.size(); }
  CombinedInput take(std::span<const std::size_t> idx) const;
};

enum class PhaseScope { FusionHead, All };

struct TrainPhase {
  PhaseScope scope = PhaseScope::FusionHead;
  double lr = 1e-2;
  int epochs = 5;
  int batch_size = 64;
};

struct TrainSchedule {
  std::vector<TrainPhase> phases = {{PhaseScope::FusionHead, 1e-2, 5, 64}, {PhaseScope::All, 1e-4, 2, 32}};
  void validate() const;
};

// Structured tail and encoder tail concatenated, then a dense fusion layer
// of `units` GELU units and a sigmoid output.
class CombinedModel {
 public:
  CombinedModel() = default;
  CombinedModel(MlpStructuredModel structured, TransformerEncoder encoder, int units, std::uint64_t seed);

  MlpStructuredModel& structured() { return structured_; }
  TransformerEncoder& encoder() { return encoder_; }
  const MlpStructuredModel& structured() const { return structured_; }
  const TransformerEncoder& encoder() const { return encoder_; }
  Eigen::Index fusion_input_dim() const { return fusion1_.in_dim(); }

  ParamList tail_params();
  ParamList fusion_params();
  ParamList params();

  // rep_s: n x r_s; pooled: n x r_t.
  Vector fusion_logits(const Matrix& rep_s, const Matrix& pooled) const;
  std::vector<double> predict(const CombinedInput& x) const;
  Matrix pooled_matrix(const Corpus& docs) const;

  double accumulate_batch(const CombinedInput& x, std::span<const std::size_t> idx, std::span<const int> y,
                          bool through_tails, const Matrix* cached_rep, const Matrix* cached_pooled);

  nlohmann::json to_json();
  static CombinedModel from_json(const nlohmann::json& j);

 private:
  MlpStructuredModel structured_;
  TransformerEncoder encoder_;
  Dense fusion1_, fusion2_;
};

struct CombinedReport {
  std::vector<FitReport> phases;
  std::vector<std::string> tail_hash_before;  // per phase
  std::vector<std::string> tail_hash_after;
};

CombinedModel build_and_train_combined(const MlpStructuredModel& structured, const TextModel& text, int units,
                                       const CombinedInput& x, std::span<const int> y,
                                       const TrainSchedule& schedule, std::uint64_t seed,
                                       CombinedReport* report = nullptr);

}  // namespace lendtext::neural
