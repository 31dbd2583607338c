#include "lendtext/pipeline/experiment.hpp"

#include <algorithm>
#include <unordered_set>

#include "lendtext/core/error.hpp"
#include "lendtext/core/rng.hpp"
#include "lendtext/core/synth.hpp"
#include "lendtext/neural/layers.hpp"
#include "lendtext/text/clean.hpp"
#include "lendtext/text/tfidf.hpp"
#include "lendtext/text/vocabulary.hpp"

namespace lendtext::pipeline {

using nlohmann::json;

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::LR: return "lr";
    case ModelKind::RF: return "rf";
    case ModelKind::DL: return "dl";
  }
  return "?";
}

std::string to_string(Subset s) {
  switch (s) {
    case Subset::Text: return "text";
    case Subset::Structured: return "structured";
    case Subset::Combined: return "combined";
  }
  return "?";
}

ModelKind parse_model(const std::string& s) {
  if (s == "lr") return ModelKind::LR;
  if (s == "rf") return ModelKind::RF;
  if (s == "dl") return ModelKind::DL;
  throw ValidationError("unknown model '" + s + "' (expected lr|rf|dl)");
}

Subset parse_subset(const std::string& s) {
  if (s == "text") return Subset::Text;
  if (s == "structured") return Subset::Structured;
  if (s == "combined") return Subset::Combined;
  throw ValidationError("unknown subset '" + s + "' (expected text|structured|combined)");
}

text::TokenSequence Prepared::encode_text(const std::string& raw) const {
  return text::encode_for_transformer(text::tokenize(text::clean_text(raw)), tokens, max_length);
}

Eigen::VectorXd Prepared::concepts_of(const std::string& raw) const {
  return lsa.project_document(text::word_tokens(raw));
}

namespace {

void encode_all(Prepared& p) {
  const auto& records = p.dataset.records;
  const std::size_t n = records.size();
  const std::size_t nc = p.n_continuous();
  const std::size_t nk = p.n_categorical();

  p.structured_names = p.dataset.schema.feature_names();
  p.structured.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nc + nk));
  p.dl_structured.continuous.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nc));
  p.dl_structured.codes.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nk));
  p.concepts.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p.lsa.k));
  p.corpus.clear();
  p.labels.clear();
  p.word_counts.clear();
  p.ids.clear();
  p.segments.clear();

  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = records[i];
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t f = 0; f < nc; ++f) {
      double v = p.scaler.scale(f, r.continuous[f]);
      p.structured(row, static_cast<Eigen::Index>(f)) = v;
      p.dl_structured.continuous(row, static_cast<Eigen::Index>(f)) = v;
    }
    for (std::size_t f = 0; f < nk; ++f) {
      int code = p.codec.encode(f, r.categorical[f]);
      double card = static_cast<double>(p.codec.cardinality(f));
      p.structured(row, static_cast<Eigen::Index>(nc + f)) = card > 0 ? code / card : 0.0;
      p.dl_structured.codes(row, static_cast<Eigen::Index>(f)) = code;
    }
    if (p.lsa.k > 0) p.concepts.row(row) = p.concepts_of(r.text).transpose();
    p.corpus.push_back(p.encode_text(r.text));
    p.labels.push_back(r.label);
    p.word_counts.push_back(static_cast<int>(synth::word_count(r.text)));
    p.ids.push_back(std::to_string(r.id));
    p.segments.push_back(to_string(r.segment));
  }
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

neural::Corpus take_docs(const neural::Corpus& c, const std::vector<std::size_t>& rows) {
  neural::Corpus out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(c[r]);
  return out;
}

neural::CombinedInput combined_input(const Prepared& p, const std::vector<std::size_t>& rows) {
  return {p.dl_structured.take(rows), take_docs(p.corpus, rows)};
}

std::vector<double> sigmoid_all(const neural::Vector& logits) {
  std::vector<double> out(static_cast<std::size_t>(logits.size()));
  for (Eigen::Index i = 0; i < logits.size(); ++i) out[static_cast<std::size_t>(i)] = neural::sigmoid(logits(i));
  return out;
}

std::vector<double> baseline_scores(const AnyModel& m, const Eigen::MatrixXd& x) {
  if (m.lr) return baselines::predict_linear(*m.lr, x);
  if (m.rf) return m.rf->predict_proba(x);
  throw ValidationError(m.tag() + ": model has no fitted baseline");
}

neural::Matrix pooled_rows(const neural::TransformerEncoder& enc, const neural::Corpus& docs) {
  neural::Matrix out(static_cast<Eigen::Index>(docs.size()), enc.dim());
  for (std::size_t i = 0; i < docs.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = enc.pooled(docs[i]);
  return out;
}

}  // namespace

Prepared prepare(Dataset dataset, const RunConfig& config) {
  dataset.validate();
  DataSplits splits = split_dataset(dataset, config.holdout_ratio, derive_seed(config.seed, "split"));
  ScalerParams scaler = fit_scaler(dataset, splits.train);
  CategoryCodec codec = fit_codec(dataset, splits.train);

  std::vector<std::string> stopwords = synth::stopwords();
  text::StopwordSet stop(stopwords.begin(), stopwords.end());
  std::vector<text::Document> lsa_docs;
  std::vector<text::Document> token_docs;
  std::vector<int> train_wc;
  for (auto i : splits.train) {
    const auto& t = dataset.records[i].text;
    lsa_docs.push_back(text::word_tokens(t));
    token_docs.push_back(text::tokenize(text::clean_text(t)));
    train_wc.push_back(static_cast<int>(synth::word_count(t)));
  }
  text::Vocabulary vocab = text::build_vocabulary(lsa_docs, config.text.min_df, config.text.max_df, stop);
  text::TfidfModel tfidf = text::fit_tfidf(lsa_docs, vocab);
  text::LsaOptions lo;
  lo.variance_target = config.text.variance_target;
  lo.k_max = config.text.k_max;
  if (config.text.k_override > 0) lo.k_override = config.text.k_override;
  text::LsaModel lsa = text::fit_lsa(text::tfidf_matrix(tfidf, lsa_docs), lo, tfidf);
  text::TokenVocabulary tokens = text::TokenVocabulary::fit(token_docs, config.text.token_min_count);
  auto thresholds = eval::default_wordcount_thresholds(train_wc);

  return reencode(std::move(dataset), std::move(splits), std::move(scaler), std::move(codec), std::move(lsa),
                  std::move(tokens), std::move(stopwords), std::move(thresholds), config.text.max_length);
}

Prepared reencode(Dataset dataset, DataSplits splits, ScalerParams scaler, CategoryCodec codec, text::LsaModel lsa,
                  text::TokenVocabulary tokens, std::vector<std::string> stopwords,
                  std::vector<double> thresholds, std::size_t max_length) {
  Prepared p;
  p.dataset = std::move(dataset);
  p.splits = std::move(splits);
  p.scaler = std::move(scaler);
  p.codec = std::move(codec);
  p.lsa = std::move(lsa);
  p.tokens = std::move(tokens);
  p.stopwords = std::move(stopwords);
  p.wordcount_thresholds = std::move(thresholds);
  p.max_length = max_length;
  if (p.scaler.dim() != p.n_continuous() || p.codec.n_features() != p.n_categorical())
    throw SchemaError("fitted preprocessing does not match the dataset schema");
  encode_all(p);
  return p;
}

std::vector<int> gather_labels(const Prepared& p, const std::vector<std::size_t>& rows) {
  std::vector<int> y;
  y.reserve(rows.size());
  for (auto r : rows) y.push_back(p.labels[r]);
  return y;
}

Eigen::MatrixXd baseline_design(const Prepared& p, Subset subset, const std::vector<std::size_t>& columns,
                                const std::vector<std::size_t>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto ns = subset == Subset::Text ? 0 : static_cast<Eigen::Index>(columns.size());
  const auto nt = subset == Subset::Structured ? 0 : p.concepts.cols();
  Eigen::MatrixXd x(n, ns + nt);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
    for (Eigen::Index c = 0; c < ns; ++c) x(i, c) = p.structured(r, static_cast<Eigen::Index>(columns[static_cast<std::size_t>(c)]));
    if (nt > 0) x.block(i, ns, 1, nt) = p.concepts.row(r);
  }
  return x;
}

baselines::RfecvReport run_rfecv(const Prepared& p, const RunConfig& config) {
  Eigen::MatrixXd x = take_rows(p.structured, p.splits.train);
  auto y = gather_labels(p, p.splits.train);
  return baselines::rfecv_select(x, y, p.structured_names, config.rfecv);
}

AnyModel train_baseline(const Prepared& p, ModelKind kind, Subset subset, const std::vector<std::size_t>& columns,
                        const RunConfig& config) {
  if (kind == ModelKind::DL) throw ValidationError("train_baseline: dl is not a baseline");
  AnyModel m;
  m.kind = kind;
  m.subset = subset;
  if (subset != Subset::Text) m.structured_columns = columns;
  Eigen::MatrixXd x = baseline_design(p, subset, m.structured_columns, p.splits.train);
  auto y = gather_labels(p, p.splits.train);
  if (kind == ModelKind::LR) {
    auto [model, report] = baselines::train_elastic_net(x, y, config.lr);
    m.lr = std::move(model);
    m.training_report = report.to_json();
  } else {
    auto [model, report] = baselines::train_random_forest(x, y, config.rf);
    m.rf = std::move(model);
    m.training_report = report.to_json();
  }
  return m;
}

AnyModel train_dl_structured(const Prepared& p, const RunConfig& config) {
  neural::StructuredConfig sc;
  for (std::size_t f = 0; f < p.n_categorical(); ++f) sc.cardinalities.push_back(static_cast<int>(p.codec.cardinality(f)));
  sc.n_continuous = static_cast<int>(p.n_continuous());
  sc.hidden = config.dl.hidden;
  neural::MlpStructuredModel model(sc, derive_seed(config.seed, "dl-structured-init"));
  neural::FitOptions fo;
  fo.lr = config.dl.structured_lr;
  fo.epochs = config.dl.structured_epochs;
  fo.batch_size = config.dl.structured_batch;
  fo.seed = derive_seed(config.seed, "dl-structured-fit");
  auto y = gather_labels(p, p.splits.train);
  auto report = neural::train_structured(model, p.dl_structured.take(p.splits.train), y, fo);

  AnyModel m;
  m.kind = ModelKind::DL;
  m.subset = Subset::Structured;
  m.dl_structured = std::move(model);
  m.training_report = {{"epoch_loss", report.epoch_loss}};
  return m;
}

AnyModel train_dl_text(const Prepared& p, const RunConfig& config) {
  neural::EncoderConfig ec;
  ec.vocab_size = static_cast<int>(p.tokens.size());
  ec.blocks = config.dl.blocks;
  ec.heads = config.dl.heads;
  ec.model_dim = config.dl.model_dim;
  ec.ff_dim = config.dl.ff_dim;
  ec.max_length = static_cast<int>(p.max_length);
  neural::TransformerEncoder encoder(ec, derive_seed(config.seed, "dl-encoder-init"));

  neural::Corpus train = take_docs(p.corpus, p.splits.train);
  neural::PretrainOptions po;
  po.mask_prob = config.dl.mask_prob;
  po.epochs = config.dl.pretrain_epochs;
  po.batch_size = config.dl.text_batch;
  po.lr = config.dl.pretrain_lr;
  po.seed = derive_seed(config.seed, "dl-pretrain");
  auto pre = neural::pretrain_encoder(encoder, train, po);

  neural::TextModel model(std::move(encoder), config.dl.text_head_hidden, derive_seed(config.seed, "dl-text-head"));
  neural::FineTuneOptions fo;
  fo.unfreeze_last_k = config.dl.finetune_k;
  fo.lr = config.dl.finetune_lr;
  fo.epochs = config.dl.finetune_epochs;
  fo.batch_size = config.dl.text_batch;
  fo.seed = derive_seed(config.seed, "dl-finetune");
  auto y = gather_labels(p, p.splits.train);
  auto ft = neural::fine_tune_text(model, train, y, fo);

  AnyModel m;
  m.kind = ModelKind::DL;
  m.subset = Subset::Text;
  m.dl_text = std::move(model);
  m.training_report = {{"pretrain", {{"epoch_loss", pre.epoch_loss},
                                     {"epoch_accuracy", pre.epoch_accuracy},
                                     {"masked_tokens", pre.masked_tokens}}},
                       {"finetune", {{"epoch_loss", ft.epoch_loss}, {"unfreeze_last_k", fo.unfreeze_last_k}}}};
  return m;
}

AnyModel train_dl_combined(const Prepared& p, const AnyModel& structured, const AnyModel& text,
                           const RunConfig& config) {
  if (!structured.dl_structured) throw DependencyError("combined model needs a trained dl structured model");
  if (!text.dl_text) throw DependencyError("combined model needs a trained dl text model");
  neural::TrainSchedule schedule;
  schedule.phases = {{neural::PhaseScope::FusionHead, config.dl.phase1_lr, config.dl.phase1_epochs, config.dl.fusion_batch},
                     {neural::PhaseScope::All, config.dl.phase2_lr, config.dl.phase2_epochs, config.dl.text_batch}};
  schedule.phases.erase(std::remove_if(schedule.phases.begin(), schedule.phases.end(),
                                       [](const neural::TrainPhase& ph) { return ph.epochs <= 0; }),
                        schedule.phases.end());
  auto y = gather_labels(p, p.splits.train);
  neural::CombinedReport report;
  auto model = neural::build_and_train_combined(*structured.dl_structured, *text.dl_text, config.dl.fusion_units,
                                                combined_input(p, p.splits.train), y, schedule,
                                                derive_seed(config.seed, "dl-combined"), &report);
  AnyModel m;
  m.kind = ModelKind::DL;
  m.subset = Subset::Combined;
  m.dl_combined = std::move(model);
  json phases = json::array();
  for (std::size_t i = 0; i < report.phases.size(); ++i) {
    phases.push_back({{"scope", schedule.phases[i].scope == neural::PhaseScope::FusionHead ? "fusion_head" : "all"},
                      {"epoch_loss", report.phases[i].epoch_loss},
                      {"tail_hash_before", report.tail_hash_before[i]},
                      {"tail_hash_after", report.tail_hash_after[i]}});
  }
  m.training_report = {{"phases", phases}};
  return m;
}

std::vector<double> AnyModel::predict(const Prepared& p, const std::vector<std::size_t>& rows) const {
  if (kind != ModelKind::DL) return baseline_scores(*this, baseline_design(p, subset, structured_columns, rows));
  if (dl_structured) return dl_structured->predict(p.dl_structured.take(rows));
  if (dl_text) return dl_text->predict(take_docs(p.corpus, rows));
  if (dl_combined) return dl_combined->predict(combined_input(p, rows));
  throw ValidationError(tag() + ": model has no fitted network");
}

std::vector<std::string> AnyModel::feature_names(const Prepared& p) const {
  std::vector<std::string> names;
  if (subset != Subset::Text) {
    if (kind == ModelKind::DL) {
      names = p.structured_names;
    } else {
      for (auto c : structured_columns) names.push_back(p.structured_names.at(c));
    }
  }
  if (subset != Subset::Structured) names.push_back(explain::kTextFeature);
  return names;
}

explain::PermutedScorer AnyModel::permuted_scorer(const Prepared& p, const std::vector<std::size_t>& rows) const {
  const auto n_features = static_cast<int>(feature_names(p).size());
  auto check = [n_features](int feature, std::span<const std::size_t> perm, std::size_t n) {
    if (feature >= n_features) throw ValidationError("permuted scorer: feature index out of range");
    if (feature >= 0 && perm.size() != n) throw ValidationError("permuted scorer: permutation size mismatch");
  };

  if (kind != ModelKind::DL) {
    Eigen::MatrixXd x = baseline_design(p, subset, structured_columns, rows);
    const auto ns = subset == Subset::Text ? 0 : static_cast<Eigen::Index>(structured_columns.size());
    const AnyModel* self = this;
    return [self, x, ns, check](int feature, std::span<const std::size_t> perm) {
      check(feature, perm, static_cast<std::size_t>(x.rows()));
      if (feature < 0) return baseline_scores(*self, x);
      Eigen::MatrixXd xp = x;
      Eigen::Index c0 = feature < ns ? feature : ns;
      Eigen::Index width = feature < ns ? 1 : x.cols() - ns;
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        xp.block(i, c0, 1, width) = x.block(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]), c0, 1, width);
      return baseline_scores(*self, xp);
    };
  }

  if (dl_structured) {
    const auto* model = &*dl_structured;
    neural::StructuredInput x = p.dl_structured.take(rows);
    const auto nc = static_cast<int>(x.continuous.cols());
    return [model, x, nc, check](int feature, std::span<const std::size_t> perm) {
      check(feature, perm, static_cast<std::size_t>(x.rows()));
      if (feature < 0) return model->predict(x);
      neural::StructuredInput xp = x;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        auto src = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]);
        if (feature < nc) xp.continuous(i, feature) = x.continuous(src, feature);
        else xp.codes(i, feature - nc) = x.codes(src, feature - nc);
      }
      return model->predict(xp);
    };
  }

  if (dl_text) {
    const auto* model = &*dl_text;
    neural::Matrix pooled = pooled_rows(model->encoder(), take_docs(p.corpus, rows));
    return [model, pooled, check](int feature, std::span<const std::size_t> perm) {
      check(feature, perm, static_cast<std::size_t>(pooled.rows()));
      std::vector<double> out(static_cast<std::size_t>(pooled.rows()));
      for (Eigen::Index i = 0; i < pooled.rows(); ++i) {
        auto src = feature < 0 ? i : static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]);
        out[static_cast<std::size_t>(i)] = neural::sigmoid(model->logit_from_pooled(pooled.row(src)));
      }
      return out;
    };
  }

  if (dl_combined) {
    const auto* model = &*dl_combined;
    neural::StructuredInput x = p.dl_structured.take(rows);
    neural::Matrix pooled = model->pooled_matrix(take_docs(p.corpus, rows));
    neural::Matrix rep = model->structured().representation(x);
    const auto nc = static_cast<int>(x.continuous.cols());
    const int text_feature = n_features - 1;
    return [model, x, pooled, rep, nc, text_feature, check](int feature, std::span<const std::size_t> perm) {
      check(feature, perm, static_cast<std::size_t>(x.rows()));
      if (feature < 0) return sigmoid_all(model->fusion_logits(rep, pooled));
      if (feature == text_feature) {
        neural::Matrix pp(pooled.rows(), pooled.cols());
        for (Eigen::Index i = 0; i < pooled.rows(); ++i)
          pp.row(i) = pooled.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]));
        return sigmoid_all(model->fusion_logits(rep, pp));
      }
      neural::StructuredInput xp = x;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        auto src = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]);
        if (feature < nc) xp.continuous(i, feature) = x.continuous(src, feature);
        else xp.codes(i, feature - nc) = x.codes(src, feature - nc);
      }
      return sigmoid_all(model->fusion_logits(model->structured().representation(xp), pooled));
    };
  }
  throw ValidationError(tag() + ": model has no fitted network");
}

explain::TextScorer AnyModel::text_scorer(const Prepared& p, std::size_t row) const {
  const Prepared* pp = &p;
  const AnyModel* self = this;
  if (kind != ModelKind::DL) {
    Eigen::RowVectorXd fixed = baseline_design(p, subset, structured_columns, {row}).row(0);
    const auto ns = subset == Subset::Text ? 0 : static_cast<Eigen::Index>(structured_columns.size());
    return [pp, self, fixed, ns](const std::vector<std::string>& texts) {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(texts.size()), fixed.size());
      for (std::size_t i = 0; i < texts.size(); ++i) {
        auto r = static_cast<Eigen::Index>(i);
        x.row(r) = fixed;
        if (self->subset != Subset::Structured) x.block(r, ns, 1, fixed.size() - ns) = pp->concepts_of(texts[i]).transpose();
      }
      return baseline_scores(*self, x);
    };
  }
  if (dl_structured) {
    double s = dl_structured->predict(p.dl_structured.take(std::vector<std::size_t>{row}))[0];
    return [s](const std::vector<std::string>& texts) { return std::vector<double>(texts.size(), s); };
  }
  if (dl_text) {
    return [pp, self](const std::vector<std::string>& texts) {
      neural::Corpus docs;
      for (const auto& t : texts) docs.push_back(pp->encode_text(t));
      return self->dl_text->predict(docs);
    };
  }
  if (dl_combined) {
    neural::Matrix rep = dl_combined->structured().representation(p.dl_structured.take(std::vector<std::size_t>{row}));
    return [pp, self, rep](const std::vector<std::string>& texts) {
      neural::Corpus docs;
      for (const auto& t : texts) docs.push_back(pp->encode_text(t));
      neural::Matrix pooled = self->dl_combined->pooled_matrix(docs);
      neural::Matrix reps = rep.replicate(static_cast<Eigen::Index>(texts.size()), 1);
      return sigmoid_all(self->dl_combined->fusion_logits(reps, pooled));
    };
  }
  throw ValidationError(tag() + ": model has no fitted network");
}

json AnyModel::to_json() {
  json j = {{"format", "lendtext.model"},
            {"version", 1},
            {"model", to_string(kind)},
            {"subset", to_string(subset)},
            {"structured_columns", structured_columns},
            {"training", training_report}};
  if (lr) j["lr"] = lr->to_json();
  if (rf) j["rf"] = rf->to_json();
  if (dl_structured) j["dl_structured"] = dl_structured->to_json();
  if (dl_text) j["dl_text"] = dl_text->to_json();
  if (dl_combined) j["dl_combined"] = dl_combined->to_json();
  return j;
}

AnyModel AnyModel::from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "lendtext.model") throw SchemaError("not a lendtext model artifact");
    AnyModel m;
    m.kind = parse_model(j.at("model").get<std::string>());
    m.subset = parse_subset(j.at("subset").get<std::string>());
    m.structured_columns = j.at("structured_columns").get<std::vector<std::size_t>>();
    m.training_report = j.value("training", json::object());
    if (j.contains("lr")) m.lr = baselines::ElasticNetModel::from_json(j["lr"]);
    if (j.contains("rf")) m.rf = baselines::ForestModel::from_json(j["rf"]);
    if (j.contains("dl_structured")) m.dl_structured = neural::MlpStructuredModel::from_json(j["dl_structured"]);
    if (j.contains("dl_text")) m.dl_text = neural::TextModel::from_json(j["dl_text"]);
    if (j.contains("dl_combined")) m.dl_combined = neural::CombinedModel::from_json(j["dl_combined"]);
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model artifact: ") + e.what());
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("model artifact: ") + e.what());
  }
}

eval::PredictionSet prediction_set(const Prepared& p, const AnyModel& model, SplitName split) {
  const auto& rows = p.splits.get(split);
  eval::PredictionSet s;
  s.model = to_string(model.kind);
  s.subset = to_string(model.subset);
  s.split = to_string(split);
  s.scores = model.predict(p, rows);
  for (auto r : rows) {
    s.ids.push_back(p.ids[r]);
    s.labels.push_back(p.labels[r]);
    s.word_counts.push_back(p.word_counts[r]);
    s.segments.push_back(p.segments[r]);
  }
  s.validate();
  return s;
}

}  // namespace lendtext::pipeline
