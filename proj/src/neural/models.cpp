#include "lendtext/neural/models.hpp"

#include <cmath>
#include <numeric>

#include "lendtext/core/error.hpp"

namespace lendtext::neural {

namespace {

void append(ParamList& dst, const ParamList& src) { dst.insert(dst.end(), src.begin(), src.end()); }

std::vector<int> gather(std::span<const int> y, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(y[i]);
  return out;
}

// Shared mini-batch loop; `step` returns the mean loss of one batch.
template <typename Step>
FitReport run_epochs(std::size_t n, int epochs, int batch_size, std::uint64_t seed, Adam& adam,
                     const ParamList& params, Step step) {
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  FitReport report;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(epoch)));
    shuffle_in_place(order, rng);
    double total = 0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
      std::span<const std::size_t> idx(order.data() + start, end - start);
      zero_grads(params);
      double loss = step(idx);
      if (!std::isfinite(loss)) {
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
      }
      total += loss * static_cast<double>(idx.size());
      adam.step();
    }
    report.epoch_loss.push_back(total / static_cast<double>(n));
  }
  return report;
}

}  // namespace

TextModel::TextModel(TransformerEncoder encoder, int head_hidden, std::uint64_t seed)
    : encoder_(std::move(encoder)),
      h1_("text.head1", encoder_.dim(), head_hidden),
      h2_("text.head2", head_hidden, 1) {
  Rng rng(derive_seed(seed, "text-head-init"));
  h1_.init(rng);
  h2_.init(rng);
}

ParamList TextModel::head_params() {
  ParamList p = h1_.params();
  append(p, h2_.params());
  return p;
}

ParamList TextModel::params() {
  ParamList p = encoder_.params();
  append(p, head_params());
  return p;
}

double TextModel::logit_from_pooled(const Matrix& pooled) const {
  return h2_.forward(gelu(h1_.forward(pooled)))(0, 0);
}

std::vector<double> TextModel::predict(const Corpus& docs) const {
  std::vector<double> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(sigmoid(logit_from_pooled(encoder_.pooled(d))));
  return out;
}

double TextModel::accumulate_batch(const Corpus& docs, std::span<const std::size_t> idx, std::span<const int> y,
                                   bool through_encoder, const std::vector<Matrix>* cached_pooled) {
  const Eigen::Index b = static_cast<Eigen::Index>(idx.size());
  Matrix pooled(b, encoder_.dim());
  std::vector<TransformerEncoder::Cache> caches(through_encoder ? idx.size() : 0);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (through_encoder) {
      pooled.row(r) = encoder_.forward(TransformerEncoder::real_ids(docs[idx[r]]), caches[r]);
    } else if (cached_pooled) {
      pooled.row(r) = (*cached_pooled)[idx[r]];
    } else {
      pooled.row(r) = encoder_.pooled(docs[idx[r]]);
    }
  }
  Matrix pre = h1_.forward(pooled);
  Matrix act = gelu(pre);
  Vector z = h2_.forward(act).col(0);
  Vector dz;
  double loss = bce_with_logits(z, gather(y, idx), &dz);
  Matrix dact = h2_.backward(act, dz);
  Matrix dpooled = h1_.backward(pooled, gelu_backward(pre, dact));
  if (through_encoder) {
    for (std::size_t r = 0; r < idx.size(); ++r) encoder_.backward(dpooled.row(r), Matrix(), caches[r]);
  }
  return loss;
}

nlohmann::json TextModel::to_json() {
  return {{"encoder_config", encoder_.config().to_json()},
          {"head_hidden", h1_.out_dim()},
          {"params", params_to_json(params())}};
}

TextModel TextModel::from_json(const nlohmann::json& j) {
  TextModel m(TransformerEncoder(EncoderConfig::from_json(j.at("encoder_config")), 0), j.at("head_hidden"), 0);
  params_from_json(m.params(), j.at("params"));
  return m;
}

FitReport fine_tune_text(TextModel& model, const Corpus& docs, std::span<const int> y, const FineTuneOptions& opt) {
  if (docs.size() != y.size()) throw ValidationError("fine_tune_text: row mismatch");
  if (docs.empty()) throw ValidationError("fine_tune_text: empty training set");
  model.encoder().unfreeze_last(opt.unfreeze_last_k);
  set_trainable(model.head_params(), true);
  if (opt.epochs <= 0) return {};
  ParamList params = model.params();
  Adam adam(params, {.lr = opt.lr, .clip_norm = 1.0});
  const bool through = opt.unfreeze_last_k > 0;
  std::vector<Matrix> cached;
  if (!through) {
    cached.reserve(docs.size());
    for (const auto& d : docs) cached.push_back(model.encoder().pooled(d));
  }
  return run_epochs(docs.size(), opt.epochs, opt.batch_size, opt.seed, adam, params,
                    [&](std::span<const std::size_t> idx) {
                      return model.accumulate_batch(docs, idx, y, through, through ? nullptr : &cached);
                    });
}

CombinedInput CombinedInput::take(std::span<const std::size_t> idx) const {
  CombinedInput out;
  out.structured = structured.take(idx);
  for (auto i : idx) out.text.push_back(text[i]);
  return out;
}

void TrainSchedule::validate() const {
  if (phases.empty()) throw ValidationError("train schedule has no phases");
  for (const auto& p : phases) {
    if (!(p.lr > 0)) throw ValidationError("train schedule: learning rates must be positive");
    if (p.epochs < 0 || p.batch_size < 1) throw ValidationError("train schedule: invalid epochs or batch size");
  }
}

CombinedModel::CombinedModel(MlpStructuredModel structured, TransformerEncoder encoder, int units, std::uint64_t seed)
    : structured_(std::move(structured)),
      encoder_(std::move(encoder)),
      fusion1_("fusion.dense", structured_.representation_dim() + encoder_.dim(), units),
      fusion2_("fusion.out", units, 1) {
  Rng rng(derive_seed(seed, "fusion-init"));
  fusion1_.init(rng);
  fusion2_.init(rng);
}

ParamList CombinedModel::tail_params() {
  ParamList p = structured_.tail_params();
  append(p, encoder_.params());
  return p;
}

ParamList CombinedModel::fusion_params() {
  ParamList p = fusion1_.params();
  append(p, fusion2_.params());
  return p;
}

ParamList CombinedModel::params() {
  ParamList p = tail_params();
  append(p, fusion_params());
  return p;
}

Vector CombinedModel::fusion_logits(const Matrix& rep_s, const Matrix& pooled) const {
  if (rep_s.rows() != pooled.rows()) throw ValidationError("combined model: row mismatch");
  Matrix in(rep_s.rows(), rep_s.cols() + pooled.cols());
  in << rep_s, pooled;
  return fusion2_.forward(gelu(fusion1_.forward(in))).col(0);
}

Matrix CombinedModel::pooled_matrix(const Corpus& docs) const {
  Matrix out(static_cast<Eigen::Index>(docs.size()), encoder_.dim());
  for (std::size_t i = 0; i < docs.size(); ++i) out.row(i) = encoder_.pooled(docs[i]);
  return out;
}

std::vector<double> CombinedModel::predict(const CombinedInput& x) const {
  if (static_cast<std::size_t>(x.structured.rows()) != x.text.size()) {
    throw ValidationError("combined model: structured and text row counts differ");
  }
  Vector z = fusion_logits(structured_.representation(x.structured), pooled_matrix(x.text));
  std::vector<double> p(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) p[i] = sigmoid(z(i));
  return p;
}

double CombinedModel::accumulate_batch(const CombinedInput& x, std::span<const std::size_t> idx,
                                       std::span<const int> y, bool through_tails, const Matrix* cached_rep,
                                       const Matrix* cached_pooled) {
  const Eigen::Index b = static_cast<Eigen::Index>(idx.size());
  Matrix rep, pooled(b, encoder_.dim());
  MlpStructuredModel::Cache scache;
  std::vector<TransformerEncoder::Cache> caches(through_tails ? idx.size() : 0);
  if (through_tails) {
    rep = structured_.representation(x.structured.take(idx), scache);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      pooled.row(r) = encoder_.forward(TransformerEncoder::real_ids(x.text[idx[r]]), caches[r]);
    }
  } else {
    rep.resize(b, cached_rep->cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      rep.row(r) = cached_rep->row(idx[r]);
      pooled.row(r) = cached_pooled->row(idx[r]);
    }
  }
  Matrix in(b, rep.cols() + pooled.cols());
  in << rep, pooled;
  Matrix pre = fusion1_.forward(in);
  Matrix act = gelu(pre);
  Vector z = fusion2_.forward(act).col(0);
  Vector dz;
  double loss = bce_with_logits(z, gather(y, idx), &dz);
  Matrix din = fusion1_.backward(in, gelu_backward(pre, fusion2_.backward(act, dz)));
  if (through_tails) {
    structured_.backward_representation(din.leftCols(rep.cols()), scache);
    Matrix dp = din.rightCols(pooled.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) encoder_.backward(dp.row(r), Matrix(), caches[r]);
  }
  return loss;
}

nlohmann::json CombinedModel::to_json() {
  return {{"structured_config", structured_.config().to_json()},
          {"encoder_config", encoder_.config().to_json()},
          {"units", fusion1_.out_dim()},
          {"params", params_to_json(params())}};
}

CombinedModel CombinedModel::from_json(const nlohmann::json& j) {
  CombinedModel m(MlpStructuredModel(StructuredConfig::from_json(j.at("structured_config")), 0),
                  TransformerEncoder(EncoderConfig::from_json(j.at("encoder_config")), 0), j.at("units"), 0);
  params_from_json(m.params(), j.at("params"));
  return m;
}

CombinedModel build_and_train_combined(const MlpStructuredModel& structured, const TextModel& text, int units,
                                       const CombinedInput& x, std::span<const int> y,
                                       const TrainSchedule& schedule, std::uint64_t seed, CombinedReport* report) {
  schedule.validate();
  if (x.rows() != y.size() || static_cast<std::size_t>(x.structured.rows()) != y.size()) {
    throw ValidationError("build_and_train_combined: row mismatch");
  }
  if (units < 1) throw ValidationError("fusion units must be >= 1");
  CombinedModel model(structured, text.encoder(), units, seed);
  ParamList params = model.params();
  for (std::size_t ph = 0; ph < schedule.phases.size(); ++ph) {
    const auto& phase = schedule.phases[ph];
    const bool all = phase.scope == PhaseScope::All;
    set_trainable(model.tail_params(), all);
    set_trainable(model.fusion_params(), true);
    if (report) report->tail_hash_before.push_back(param_hash(model.tail_params()));
    Adam adam(params, {.lr = phase.lr, .clip_norm = 1.0});
    Matrix rep, pooled;
    if (!all) {
      rep = model.structured().representation(x.structured);
      pooled = model.pooled_matrix(x.text);
    }
    auto fit = run_epochs(y.size(), phase.epochs, phase.batch_size, derive_seed(seed, ph + 1), adam, params,
                          [&](std::span<const std::size_t> idx) {
                            return model.accumulate_batch(x, idx, y, all, &rep, &pooled);
                          });
    if (report) {
      report->phases.push_back(std::move(fit));
      report->tail_hash_after.push_back(param_hash(model.tail_params()));
    }
  }
  set_trainable(params, true);
  return model;
}

}  // namespace lendtext::neural
