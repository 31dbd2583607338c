#pragma once

#include <cstdint>
#include <vector>

#include "lendtext/neural/layers.hpp"
#include "lendtext/text/token_encoder.hpp"

namespace lendtext::neural {

struct EncoderConfig {
  int vocab_size = 0;
  int blocks = 2;
  int heads = 4;
  int model_dim = 64;
  int ff_dim = 128;
  int max_length = 128;

  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
  void validate() const;
};

// Token + learned position embeddings, embedding LayerNorm, post-LN blocks,
// CLS pooling through a tanh dense layer. Only the real (unmasked) prefix of
// a sequence is processed, so PAD extension never changes the output.
class TransformerEncoder {
 public:
  struct Cache {
    std::vector<int> ids;
    std::vector<int> positions;
    LayerNorm::Cache emb_ln;
    std::vector<EncoderBlock::Cache> blocks;
    Matrix hidden;      // final block output, T x d
    Matrix cls;         // 1 x d, pooler input
    Matrix pooled;      // 1 x d
  };

  TransformerEncoder() = default;
  TransformerEncoder(const EncoderConfig& config, std::uint64_t seed);

  const EncoderConfig& config() const { return config_; }
  Eigen::Index dim() const { return config_.model_dim; }

  // Real-prefix ids of a padded sequence (CLS included).
  static std::vector<int> real_ids(const text::TokenSequence& seq);

  Matrix forward(const std::vector<int>& ids, Cache& cache) const;  // returns pooled 1 x d
  Matrix pooled(const text::TokenSequence& seq) const;
  // d_pooled: 1 x d; d_hidden: T x d or empty. Stops at the lowest block
  // holding a trainable parameter; embeddings get gradients only if trainable.
  void backward(const Matrix& d_pooled, const Matrix& d_hidden, const Cache& cache);

  // Last k blocks trainable; pooler trainable when k >= 1; embeddings when k == E.
  void unfreeze_last(int k);

  ParamList params();
  ParamList block_params(int block);
  ParamList embedding_params();
  ParamList pooler_params() { return pooler_.params(); }

  nlohmann::json to_json();
  static TransformerEncoder from_json(const nlohmann::json& j);

 private:
  EncoderConfig config_;
  Embedding tokens_;
  Embedding positions_;
  LayerNorm emb_ln_;
  std::vector<EncoderBlock> blocks_;
  Dense pooler_;
};

struct PretrainOptions {
  double mask_prob = 0.15;
  int epochs = 3;
  int batch_size = 32;
  double lr = 1e-3;
  std::uint64_t seed = 1;
};

struct PretrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_accuracy;  // masked-token accuracy
  std::size_t masked_tokens = 0;
};

// Position indices (never CLS or PAD) selected for masking.
std::vector<std::size_t> select_mask_positions(const text::TokenSequence& seq, double mask_prob, Rng& rng);

// Masked-token pretraining with a dense decoder over the vocabulary; every
// selected token is replaced by MASK. mask_prob == 0 leaves the encoder unchanged.
PretrainReport pretrain_encoder(TransformerEncoder& encoder, const std::vector<text::TokenSequence>& corpus,
                                const PretrainOptions& options);

}  // namespace lendtext::neural
