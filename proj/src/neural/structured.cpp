#include "lendtext/neural/structured.hpp"

#include <cmath>
#include <numeric>

#include "lendtext/core/error.hpp"

namespace lendtext::neural {

int embedding_size(int n) {
  if (n < 1) throw ValidationError("embedding_size: cardinality must be >= 1");
  return std::max(1, static_cast<int>(std::floor(n / 2.0 + 0.5)));
}

StructuredInput StructuredInput::take(std::span<const std::size_t> idx) const {
  StructuredInput out;
  out.continuous.resize(static_cast<Eigen::Index>(idx.size()), continuous.cols());
  out.codes.resize(static_cast<Eigen::Index>(idx.size()), codes.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.continuous.row(r) = continuous.row(static_cast<Eigen::Index>(idx[r]));
    out.codes.row(r) = codes.row(static_cast<Eigen::Index>(idx[r]));
  }
  return out;
}

nlohmann::json StructuredConfig::to_json() const {
  return {{"cardinalities", cardinalities}, {"n_continuous", n_continuous}, {"hidden", hidden}};
}

StructuredConfig StructuredConfig::from_json(const nlohmann::json& j) {
  StructuredConfig c;
  c.cardinalities = j.at("cardinalities").get<std::vector<int>>();
  c.n_continuous = j.at("n_continuous");
  c.hidden = j.at("hidden").get<std::vector<int>>();
  return c;
}

MlpStructuredModel::MlpStructuredModel(const StructuredConfig& config, std::uint64_t seed) : config_(config) {
  if (config.hidden.empty()) throw ConfigError("structured model needs at least one hidden layer");
  Rng rng(derive_seed(seed, "structured-init"));
  for (std::size_t f = 0; f < config.cardinalities.size(); ++f) {
    int n = config.cardinalities[f];
    embeddings_.emplace_back("structured.embedding" + std::to_string(f), n + 1, embedding_size(std::max(n, 1)));
    init_normal(embeddings_.back().table, 0.05, rng);
  }
  Eigen::Index in = input_dim();
  for (std::size_t l = 0; l < config.hidden.size(); ++l) {
    layers_.emplace_back("structured.dense" + std::to_string(l), in, config.hidden[l]);
    layers_.back().init(rng);
    in = config.hidden[l];
  }
  head_ = Dense("structured.head", in, 1);
  head_.init(rng);
}

Eigen::Index MlpStructuredModel::input_dim() const {
  Eigen::Index d = config_.n_continuous;
  for (int n : config_.cardinalities) d += embedding_size(std::max(n, 1));
  return d;
}

Eigen::Index MlpStructuredModel::representation_dim() const { return config_.hidden.back(); }

Matrix MlpStructuredModel::representation(const StructuredInput& x, Cache& c) const {
  if (x.codes.cols() != static_cast<Eigen::Index>(embeddings_.size()) ||
      x.continuous.cols() != config_.n_continuous) {
    throw ValidationError("structured model: input dimension mismatch");
  }
  const Eigen::Index n = x.rows();
  Matrix in(n, input_dim());
  Eigen::Index col = 0;
  for (std::size_t f = 0; f < embeddings_.size(); ++f) {
    std::vector<int> ids(x.codes.col(f).data(), x.codes.col(f).data() + n);
    Matrix e = embeddings_[f].forward(ids);
    in.middleCols(col, e.cols()) = e;
    col += e.cols();
  }
  in.rightCols(config_.n_continuous) = x.continuous;
  c.input = x;
  c.act.assign(1, in);
  c.pre.clear();
  for (const auto& layer : layers_) {
    c.pre.push_back(layer.forward(c.act.back()));
    c.act.push_back(gelu(c.pre.back()));
  }
  return c.act.back();
}

Matrix MlpStructuredModel::representation(const StructuredInput& x) const {
  Cache c;
  return representation(x, c);
}

void MlpStructuredModel::backward_representation(const Matrix& d_rep, const Cache& c) {
  Matrix d = d_rep;
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    d = layers_[l].backward(c.act[l], gelu_backward(c.pre[l], d));
  }
  bool emb_trainable = false;
  for (const auto& e : embeddings_) emb_trainable |= e.table.trainable;
  if (!emb_trainable) return;
  const Eigen::Index n = c.input.rows();
  Eigen::Index col = 0;
  for (std::size_t f = 0; f < embeddings_.size(); ++f) {
    std::vector<int> ids(c.input.codes.col(f).data(), c.input.codes.col(f).data() + n);
    Eigen::Index w = embeddings_[f].table.value.cols();
    embeddings_[f].backward(ids, d.middleCols(col, w));
    col += w;
  }
}

Vector MlpStructuredModel::logits(const StructuredInput& x) const {
  return head_.forward(representation(x)).col(0);
}

std::vector<double> MlpStructuredModel::predict(const StructuredInput& x) const {
  Vector z = logits(x);
  std::vector<double> p(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) p[i] = sigmoid(z(i));
  return p;
}

ParamList MlpStructuredModel::tail_params() {
  ParamList p;
  for (auto& e : embeddings_) p.push_back(&e.table);
  for (auto& l : layers_)
    for (auto* q : l.params()) p.push_back(q);
  return p;
}

ParamList MlpStructuredModel::params() {
  ParamList p = tail_params();
  for (auto* q : head_.params()) p.push_back(q);
  return p;
}

nlohmann::json MlpStructuredModel::to_json() {
  return {{"config", config_.to_json()}, {"params", params_to_json(params())}};
}

MlpStructuredModel MlpStructuredModel::from_json(const nlohmann::json& j) {
  MlpStructuredModel m(StructuredConfig::from_json(j.at("config")), 0);
  params_from_json(m.params(), j.at("params"));
  return m;
}

double bce_with_logits(const Vector& logits, std::span<const int> y, Vector* d_logits) {
  const Eigen::Index n = logits.size();
  double loss = 0;
  if (d_logits) d_logits->resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double z = logits(i);
    loss += softplus(z) - y[i] * z;
    if (d_logits) (*d_logits)(i) = (sigmoid(z) - y[i]) / static_cast<double>(n);
  }
  return loss / static_cast<double>(n);
}

FitReport train_structured(MlpStructuredModel& model, const StructuredInput& x, std::span<const int> y,
                           const FitOptions& opt) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ValidationError("train_structured: row mismatch");
  FitReport report;
  if (opt.epochs <= 0) return report;
  ParamList params = model.params();
  Adam adam(params, {.lr = opt.lr, .clip_norm = opt.clip_norm});
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(epoch)));
    shuffle_in_place(order, rng);
    double total = 0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opt.batch_size));
      std::span<const std::size_t> idx(order.data() + start, end - start);
      StructuredInput xb = x.take(idx);
      std::vector<int> yb;
      for (auto i : idx) yb.push_back(y[i]);
      zero_grads(params);
      MlpStructuredModel::Cache cache;
      Matrix rep = model.representation(xb, cache);
      Vector z = model.head().forward(rep).col(0);
      Vector dz;
      double loss = bce_with_logits(z, yb, &dz);
      if (!std::isfinite(loss)) {
        throw NumericalError("train_structured: non-finite loss at epoch " + std::to_string(epoch));
      }
      total += loss * static_cast<double>(idx.size());
      Matrix drep = model.head().backward(rep, dz);
      model.backward_representation(drep, cache);
      adam.step();
    }
    report.epoch_loss.push_back(total / static_cast<double>(y.size()));
  }
  return report;
}

}  // namespace lendtext::neural
