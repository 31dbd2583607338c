#include "lendtext/neural/encoder.hpp"

#include <cmath>
#include <numeric>

#include "lendtext/core/error.hpp"

namespace lendtext::neural {

nlohmann::json EncoderConfig::to_json() const {
  return {{"vocab_size", vocab_size}, {"blocks", blocks},   {"heads", heads},
          {"model_dim", model_dim},   {"ff_dim", ff_dim},   {"max_length", max_length}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.vocab_size = j.at("vocab_size");
  c.blocks = j.at("blocks");
  c.heads = j.at("heads");
  c.model_dim = j.at("model_dim");
  c.ff_dim = j.at("ff_dim");
  c.max_length = j.at("max_length");
  return c;
}

void EncoderConfig::validate() const {
  if (vocab_size <= text::kFirstWordId) throw ConfigError("encoder: vocab_size too small");
  if (blocks < 0 || heads < 1 || model_dim < 1 || ff_dim < 1 || max_length < 2) {
    throw ConfigError("encoder: invalid architecture");
  }
  if (model_dim % heads != 0) throw ConfigError("encoder: model_dim must be divisible by heads");
}

TransformerEncoder::TransformerEncoder(const EncoderConfig& config, std::uint64_t seed)
    : config_(config),
      tokens_("encoder.tokens", config.vocab_size, config.model_dim),
      positions_("encoder.positions", config.max_length, config.model_dim),
      emb_ln_("encoder.emb_ln", config.model_dim),
      pooler_("encoder.pooler", config.model_dim, config.model_dim) {
  config_.validate();
  Rng rng(derive_seed(seed, "encoder-init"));
  init_normal(tokens_.table, 0.02, rng);
  init_normal(positions_.table, 0.02, rng);
  for (int b = 0; b < config.blocks; ++b) {
    blocks_.emplace_back("encoder.block" + std::to_string(b), config.model_dim, config.heads, config.ff_dim);
    blocks_.back().init(rng);
  }
  pooler_.init(rng);
}

std::vector<int> TransformerEncoder::real_ids(const text::TokenSequence& seq) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < seq.ids.size(); ++i)
    if (seq.mask[i]) ids.push_back(seq.ids[i]);
  return ids;
}

Matrix TransformerEncoder::forward(const std::vector<int>& ids, Cache& c) const {
  if (ids.empty()) throw ValidationError("encoder: empty sequence");
  if (ids.size() > static_cast<std::size_t>(config_.max_length)) {
    throw ValidationError("encoder: sequence longer than max_length");
  }
  c.ids = ids;
  c.positions.resize(ids.size());
  std::iota(c.positions.begin(), c.positions.end(), 0);
  Matrix x = tokens_.forward(ids) + positions_.forward(c.positions);
  x = emb_ln_.forward(x, c.emb_ln);
  c.blocks.resize(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) x = blocks_[b].forward(x, c.blocks[b]);
  c.hidden = x;
  c.cls = x.topRows(1);
  c.pooled = pooler_.forward(c.cls).array().tanh();
  return c.pooled;
}

Matrix TransformerEncoder::pooled(const text::TokenSequence& seq) const {
  Cache c;
  return forward(real_ids(seq), c);
}

void TransformerEncoder::backward(const Matrix& d_pooled, const Matrix& d_hidden, const Cache& c) {
  auto any_trainable = [](const ParamList& ps) {
    for (auto* p : ps)
      if (p->trainable) return true;
    return false;
  };
  const bool emb_trainable = any_trainable(embedding_params());
  int lowest = static_cast<int>(blocks_.size());
  if (emb_trainable) {
    lowest = -1;
  } else {
    for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
      if (any_trainable(block_params(b))) {
        lowest = b;
        break;
      }
    }
  }

  Matrix dpre = d_pooled.cwiseProduct((1.0 - c.pooled.array().square()).matrix());
  Matrix dcls = pooler_.backward(c.cls, dpre);
  if (lowest >= static_cast<int>(blocks_.size())) return;
  Matrix dx = d_hidden.size() ? d_hidden : Matrix::Zero(c.hidden.rows(), c.hidden.cols());
  dx.topRows(1) += dcls;
  for (int b = static_cast<int>(blocks_.size()) - 1; b >= std::max(lowest, 0); --b) {
    dx = blocks_[b].backward(dx, c.blocks[b]);
  }
  if (lowest >= 0) return;
  dx = emb_ln_.backward(dx, c.emb_ln);
  tokens_.backward(c.ids, dx);
  positions_.backward(c.positions, dx);
}

void TransformerEncoder::unfreeze_last(int k) {
  const int e = static_cast<int>(blocks_.size());
  if (k < 0 || k > e) {
    throw ValidationError("unfreeze_last_k=" + std::to_string(k) + " outside [0, " + std::to_string(e) + "]");
  }
  set_trainable(embedding_params(), k == e);
  for (int b = 0; b < e; ++b) set_trainable(block_params(b), b >= e - k);
  set_trainable(pooler_.params(), k >= 1);
}

ParamList TransformerEncoder::embedding_params() {
  ParamList p = tokens_.params();
  p.push_back(&positions_.table);
  for (auto* q : emb_ln_.params()) p.push_back(q);
  return p;
}

ParamList TransformerEncoder::block_params(int block) { return blocks_.at(block).params(); }

ParamList TransformerEncoder::params() {
  ParamList p = embedding_params();
  for (auto& b : blocks_)
    for (auto* q : b.params()) p.push_back(q);
  for (auto* q : pooler_.params()) p.push_back(q);
  return p;
}

nlohmann::json TransformerEncoder::to_json() {
  return {{"config", config_.to_json()}, {"params", params_to_json(params())}};
}

TransformerEncoder TransformerEncoder::from_json(const nlohmann::json& j) {
  TransformerEncoder e(EncoderConfig::from_json(j.at("config")), 0);
  params_from_json(e.params(), j.at("params"));
  return e;
}

std::vector<std::size_t> select_mask_positions(const text::TokenSequence& seq, double mask_prob, Rng& rng) {
  std::vector<std::size_t> out;
  if (mask_prob <= 0) return out;
  for (std::size_t i = 0; i < seq.ids.size(); ++i) {
    if (!seq.mask[i] || seq.ids[i] == text::kCls || seq.ids[i] == text::kPad) continue;
    if (uniform01(rng) < mask_prob) out.push_back(i);
  }
  return out;
}

PretrainReport pretrain_encoder(TransformerEncoder& encoder, const std::vector<text::TokenSequence>& corpus,
                                const PretrainOptions& opt) {
  if (corpus.empty()) throw ValidationError("pretrain_encoder: empty corpus");
  if (opt.mask_prob < 0 || opt.mask_prob >= 1) throw ValidationError("mask_prob must lie in [0, 1)");
  PretrainReport report;
  if (opt.mask_prob == 0 || opt.epochs == 0) return report;

  const auto& cfg = encoder.config();
  Rng init_rng(derive_seed(opt.seed, "mlm-decoder"));
  Dense decoder("mlm.decoder", cfg.model_dim, cfg.vocab_size);
  decoder.init(init_rng);
  ParamList params = encoder.params();
  for (auto* p : decoder.params()) params.push_back(p);
  Adam adam(params, {.lr = opt.lr, .clip_norm = 1.0});

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(epoch)));
    shuffle_in_place(order, rng);
    double loss_sum = 0;
    std::size_t n_masked = 0, n_correct = 0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opt.batch_size));
      struct Item {
        TransformerEncoder::Cache cache;
        std::vector<std::size_t> pos;
        std::vector<int> targets;
      };
      std::vector<Item> items;
      std::size_t batch_masked = 0;
      for (std::size_t r = start; r < end; ++r) {
        const auto& seq = corpus[order[r]];
        Item it;
        it.pos = select_mask_positions(seq, opt.mask_prob, rng);
        if (it.pos.empty()) continue;
        std::vector<int> ids = TransformerEncoder::real_ids(seq);
        for (auto p : it.pos) {
          it.targets.push_back(ids[p]);
          ids[p] = text::kMask;
        }
        encoder.forward(ids, it.cache);
        batch_masked += it.pos.size();
        items.push_back(std::move(it));
      }
      if (batch_masked == 0) continue;
      zero_grads(params);
      for (auto& it : items) {
        Matrix h(it.pos.size(), cfg.model_dim);
        for (std::size_t m = 0; m < it.pos.size(); ++m) h.row(m) = it.cache.hidden.row(it.pos[m]);
        Matrix logits = decoder.forward(h);
        Matrix dlogits(logits.rows(), logits.cols());
        for (Eigen::Index m = 0; m < logits.rows(); ++m) {
          Eigen::Index arg;
          double mx = logits.row(m).maxCoeff(&arg);
          RowVector e = (logits.row(m).array() - mx).exp();
          double z = e.sum();
          loss_sum += std::log(z) + mx - logits(m, it.targets[m]);
          if (arg == it.targets[m]) ++n_correct;
          dlogits.row(m) = e / z;
          dlogits(m, it.targets[m]) -= 1.0;
        }
        dlogits /= static_cast<double>(batch_masked);
        Matrix dh = decoder.backward(h, dlogits);
        Matrix dhidden = Matrix::Zero(it.cache.hidden.rows(), cfg.model_dim);
        for (std::size_t m = 0; m < it.pos.size(); ++m) dhidden.row(it.pos[m]) += dh.row(m);
        encoder.backward(Matrix::Zero(1, cfg.model_dim), dhidden, it.cache);
      }
      adam.step();
      n_masked += batch_masked;
    }
    if (n_masked > 0 && !std::isfinite(loss_sum)) throw NumericalError("pretrain_encoder: non-finite loss");
    report.epoch_loss.push_back(n_masked ? loss_sum / n_masked : 0.0);
    report.epoch_accuracy.push_back(n_masked ? static_cast<double>(n_correct) / n_masked : 0.0);
    report.masked_tokens += n_masked;
  }
  return report;
}

}  // namespace lendtext::neural
