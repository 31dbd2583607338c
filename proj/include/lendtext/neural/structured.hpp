#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lendtext/neural/layers.hpp"

namespace lendtext::neural {

// max(1, floor(n/2 + 0.5))
int embedding_size(int n);

struct StructuredInput {
  Matrix continuous;     // rows x n_continuous, already scaled
  Eigen::MatrixXi codes;  // rows x n_categorical, codec indices (0 = unknown)

  Eigen::Index rows() const { return continuous.rows(); }
  StructuredInput take(std::span<const std::size_t> idx) const;
};

struct StructuredConfig {
  std::vector<int> cardinalities;  // codec n per categorical feature
  int n_continuous = 0;
  std::vector<int> hidden = {64, 32};

  nlohmann::json to_json() const;
  static StructuredConfig from_json(const nlohmann::json& j);
};

struct FitOptions {
  double lr = 1e-3;
  int epochs = 30;
  int batch_size = 64;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

struct FitReport {
  std::vector<double> epoch_loss;  // mean binary cross-entropy per epoch
};

// Entity-embedding MLP: embeddings concatenated with continuous inputs, then
// GELU dense layers; the last hidden layer is the representation fed to fusion.
class MlpStructuredModel {
 public:
  struct Cache {
    StructuredInput input;
    std::vector<Matrix> pre;  // pre-activation per hidden layer
    std::vector<Matrix> act;  // act[0] = concatenated input, act[i+1] = gelu(pre[i])
  };

  MlpStructuredModel() = default;
  MlpStructuredModel(const StructuredConfig& config, std::uint64_t seed);

  const StructuredConfig& config() const { return config_; }
  Eigen::Index representation_dim() const;
  Eigen::Index input_dim() const;

  Matrix representation(const StructuredInput& x, Cache& cache) const;
  Matrix representation(const StructuredInput& x) const;
  void backward_representation(const Matrix& d_rep, const Cache& cache);

  // Output head on the representation.
  Vector logits(const StructuredInput& x) const;
  std::vector<double> predict(const StructuredInput& x) const;

  ParamList tail_params();  // embeddings + hidden layers
  ParamList params();       // tail + head
  Dense& head() { return head_; }
  const std::vector<Embedding>& embeddings() const { return embeddings_; }

  nlohmann::json to_json();
  static MlpStructuredModel from_json(const nlohmann::json& j);

 private:
  StructuredConfig config_;
  std::vector<Embedding> embeddings_;
  std::vector<Dense> layers_;
  Dense head_;
};

FitReport train_structured(MlpStructuredModel& model, const StructuredInput& x, std::span<const int> y,
                           const FitOptions& options);

// Mean BCE on logits; fills d_logits with dL/dlogit when non-null.
double bce_with_logits(const Vector& logits, std::span<const int> y, Vector* d_logits);

}  // namespace lendtext::neural
