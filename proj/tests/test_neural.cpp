#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "lendtext/core/error.hpp"
#include "lendtext/eval/metrics.hpp"
#include "lendtext/neural/grad_check.hpp"
#include "lendtext/neural/models.hpp"

using namespace lendtext;
using namespace lendtext::neural;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = scale * standard_normal(rng);
  return m;
}

// Random linear read-out of a layer's output so every output entry matters.
double readout(const Matrix& y, const Matrix& proj) { return y.cwiseProduct(proj).sum(); }

void expect_close_gradients(const GradCheckReport& r, double tol = 1e-6) {
  for (const auto& b : r.blocks) {
    EXPECT_LT(b.max_rel_error, tol) << b.name;
    EXPECT_GT(b.checked, 0u) << b.name;
  }
}

text::TokenSequence seq_of(std::vector<int> words, std::size_t L) {
  text::TokenSequence s;
  s.ids.assign(L, text::kPad);
  s.mask.assign(L, 0);
  s.ids[0] = text::kCls;
  s.mask[0] = 1;
  for (std::size_t i = 0; i < words.size() && i + 1 < L; ++i) {
    s.ids[i + 1] = words[i];
    s.mask[i + 1] = 1;
  }
  return s;
}

EncoderConfig small_encoder(int vocab = 12) {
  EncoderConfig c;
  c.vocab_size = vocab;
  c.blocks = 2;
  c.heads = 2;
  c.model_dim = 8;
  c.ff_dim = 12;
  c.max_length = 16;
  return c;
}

}  // namespace

TEST(EmbeddingSize, RoundHalfUp) {
  EXPECT_EQ(embedding_size(40), 20);
  EXPECT_EQ(embedding_size(3), 2);
  EXPECT_EQ(embedding_size(1), 1);
  EXPECT_EQ(embedding_size(2), 1);
  EXPECT_EQ(embedding_size(5), 3);
  EXPECT_THROW(embedding_size(0), ValidationError);
  for (int n = 1; n < 200; ++n) EXPECT_LE(embedding_size(n), embedding_size(n + 1));
}

TEST(GradCheck, LinearSigmoidToy) {
  Rng rng(3);
  Dense d("toy", 4, 1);
  d.init(rng);
  Matrix x = random_matrix(6, 4, rng);
  std::vector<int> y = {0, 1, 1, 0, 1, 0};
  auto loss = [&](bool grad) {
    Vector z = d.forward(x).col(0);
    Vector dz;
    double l = bce_with_logits(z, y, grad ? &dz : nullptr);
    if (grad) {
      zero_grads(d.params());
      d.backward(x, dz);
    }
    return l;
  };
  auto r = grad_check(loss, d.params());
  expect_close_gradients(r);
}

TEST(GradCheck, DenseInputGradient) {
  Rng rng(4);
  Dense d("dense", 5, 3);
  d.init(rng);
  Param xin;
  xin.name = "input";
  xin.resize(4, 5);
  xin.value = random_matrix(4, 5, rng);
  Matrix proj = random_matrix(4, 3, rng);
  auto loss = [&](bool grad) {
    Matrix y = d.forward(xin.value);
    if (grad) {
      zero_grads(d.params());
      xin.zero_grad();
      xin.grad = d.backward(xin.value, proj);
    }
    return readout(y, proj);
  };
  ParamList ps = d.params();
  ps.push_back(&xin);
  expect_close_gradients(grad_check(loss, ps));
}

TEST(GradCheck, LayerNorm) {
  Rng rng(5);
  LayerNorm ln("ln", 6);
  ln.gamma.value = random_matrix(1, 6, rng);
  ln.beta.value = random_matrix(1, 6, rng);
  Param xin;
  xin.name = "input";
  xin.resize(3, 6);
  xin.value = random_matrix(3, 6, rng);
  Matrix proj = random_matrix(3, 6, rng);
  auto loss = [&](bool grad) {
    LayerNorm::Cache c;
    Matrix y = ln.forward(xin.value, c);
    // squared read-out makes the loss nonlinear in the normalized output
    double l = readout(y, proj) + 0.5 * y.squaredNorm();
    if (grad) {
      zero_grads(ln.params());
      xin.zero_grad();
      xin.grad = ln.backward(proj + y, c);
    }
    return l;
  };
  ParamList ps = ln.params();
  ps.push_back(&xin);
  expect_close_gradients(grad_check(loss, ps));
}

TEST(LayerNormProperties, NormalizedMoments) {
  Rng rng(6);
  LayerNorm ln("ln", 16);
  Matrix x = random_matrix(10, 16, rng, 5.0);
  x.array() += 3.0;
  LayerNorm::Cache c;
  ln.forward(x, c);
  for (Eigen::Index i = 0; i < 10; ++i) {
    double mean = c.xhat.row(i).mean();
    double var = (c.xhat.row(i).array() - mean).square().mean();
    EXPECT_LT(std::abs(mean), 1e-6);
    EXPECT_NEAR(var, 1.0, 1e-4);
  }
}

TEST(GradCheck, Embedding) {
  Rng rng(7);
  Embedding e("emb", 5, 3);
  init_normal(e.table, 0.5, rng);
  std::vector<int> ids = {0, 3, 3, 1, 4};
  Matrix proj = random_matrix(5, 3, rng);
  auto loss = [&](bool grad) {
    Matrix y = e.forward(ids);
    Matrix g = gelu(y);
    double l = readout(g, proj);
    if (grad) {
      zero_grads(e.params());
      e.backward(ids, gelu_backward(y, proj));
    }
    return l;
  };
  expect_close_gradients(grad_check(loss, e.params()));
}

TEST(GradCheck, MultiHeadAttentionWithKeyMask) {
  Rng rng(8);
  MultiHeadAttention att("att", 6, 2);
  att.init(rng);
  for (auto* p : att.params()) p->value += random_matrix(p->value.rows(), p->value.cols(), rng, 0.1);
  Param xin;
  xin.name = "input";
  xin.resize(5, 6);
  xin.value = random_matrix(5, 6, rng);
  std::vector<int> mask = {1, 1, 1, 0, 1};
  Matrix proj = random_matrix(5, 6, rng);
  auto loss = [&](bool grad) {
    MultiHeadAttention::Cache c;
    Matrix y = att.forward(xin.value, c, mask);
    if (grad) {
      zero_grads(att.params());
      xin.zero_grad();
      xin.grad = att.backward(proj, c);
    }
    return readout(y, proj);
  };
  ParamList ps = att.params();
  ps.push_back(&xin);
  expect_close_gradients(grad_check(loss, ps));
}

TEST(Attention, RowsSumToOneAndPadGetsZeroWeight) {
  Rng rng(9);
  MultiHeadAttention att("att", 8, 4);
  att.init(rng);
  Matrix x = random_matrix(7, 8, rng);
  std::vector<int> mask = {1, 1, 1, 1, 0, 0, 0};
  MultiHeadAttention::Cache c;
  Matrix y = att.forward(x, c, mask);
  for (const auto& p : c.probs) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      EXPECT_LT(std::abs(p.row(i).sum() - 1.0), 1e-6);
      for (Eigen::Index j = 4; j < 7; ++j) EXPECT_EQ(p(i, j), 0.0);
    }
  }
  // Real rows equal the computation over the real prefix alone.
  MultiHeadAttention::Cache c2;
  Matrix y2 = att.forward(x.topRows(4), c2);
  EXPECT_LT((y.topRows(4) - y2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GradCheck, FeedForward) {
  Rng rng(10);
  FeedForward ff("ff", 5, 7);
  ff.init(rng);
  Param xin;
  xin.name = "input";
  xin.resize(4, 5);
  xin.value = random_matrix(4, 5, rng);
  Matrix proj = random_matrix(4, 5, rng);
  auto loss = [&](bool grad) {
    FeedForward::Cache c;
    Matrix y = ff.forward(xin.value, c);
    if (grad) {
      zero_grads(ff.params());
      xin.zero_grad();
      xin.grad = ff.backward(proj, c);
    }
    return readout(y, proj);
  };
  ParamList ps = ff.params();
  ps.push_back(&xin);
  expect_close_gradients(grad_check(loss, ps));
}

TEST(GradCheck, EncoderBlock) {
  Rng rng(11);
  EncoderBlock block("block", 8, 2, 12);
  block.init(rng);
  Param xin;
  xin.name = "input";
  xin.resize(5, 8);
  xin.value = random_matrix(5, 8, rng);
  Matrix proj = random_matrix(5, 8, rng);
  auto loss = [&](bool grad) {
    EncoderBlock::Cache c;
    Matrix y = block.forward(xin.value, c);
    if (grad) {
      zero_grads(block.params());
      xin.zero_grad();
      xin.grad = block.backward(proj, c);
    }
    return readout(y, proj);
  };
  ParamList ps = block.params();
  ps.push_back(&xin);
  expect_close_gradients(grad_check(loss, ps));
}

TEST(GradCheck, TextModelEndToEnd) {
  TextModel model(TransformerEncoder(small_encoder(), 21), 5, 22);
  Corpus docs = {seq_of({4, 5, 6}, 16), seq_of({7, 8, 9, 10, 4}, 16), seq_of({11}, 16), seq_of({5, 5, 6, 7}, 16)};
  std::vector<int> y = {1, 0, 1, 0};
  std::vector<std::size_t> idx = {0, 1, 2, 3};
  ParamList ps = model.params();
  auto loss = [&](bool grad) {
    if (grad) {
      zero_grads(ps);
      return model.accumulate_batch(docs, idx, y, true, nullptr);
    }
    double l = 0;
    auto p = model.predict(docs);
    for (std::size_t i = 0; i < p.size(); ++i) l -= y[i] ? std::log(p[i]) : std::log(1 - p[i]);
    return l / static_cast<double>(p.size());
  };
  auto r = grad_check(loss, ps);
  expect_close_gradients(r);
}

TEST(GradCheck, StructuredAndFusion) {
  StructuredConfig sc;
  sc.cardinalities = {3, 4};
  sc.n_continuous = 2;
  sc.hidden = {6, 4};
  MlpStructuredModel s(sc, 31);
  TransformerEncoder enc(small_encoder(), 32);
  CombinedModel model(s, enc, 5, 33);
  Rng rng(34);
  CombinedInput x;
  x.structured.continuous = random_matrix(4, 2, rng);
  x.structured.codes.resize(4, 2);
  x.structured.codes << 0, 1, 1, 4, 3, 2, 2, 0;
  x.text = {seq_of({4, 5}, 16), seq_of({6, 7, 8}, 16), seq_of({9}, 16), seq_of({10, 11, 4}, 16)};
  std::vector<int> y = {1, 1, 0, 0};
  std::vector<std::size_t> idx = {0, 1, 2, 3};
  ParamList ps = model.params();
  auto loss = [&](bool grad) {
    if (grad) {
      zero_grads(ps);
      return model.accumulate_batch(x, idx, y, true, nullptr, nullptr);
    }
    double l = 0;
    auto p = model.predict(x);
    for (std::size_t i = 0; i < p.size(); ++i) l -= y[i] ? std::log(p[i]) : std::log(1 - p[i]);
    return l / static_cast<double>(p.size());
  };
  expect_close_gradients(grad_check(loss, ps));
}

TEST(Predict, ZeroParametersGiveHalf) {
  StructuredConfig sc;
  sc.cardinalities = {3};
  sc.n_continuous = 1;
  MlpStructuredModel s(sc, 1);
  for (auto* p : s.params()) p->value.setZero();
  StructuredInput x;
  x.continuous = Matrix::Ones(3, 1);
  x.codes = Eigen::MatrixXi::Ones(3, 1);
  for (double p : s.predict(x)) EXPECT_EQ(p, 0.5);

  TextModel t(TransformerEncoder(small_encoder(), 2), 4, 3);
  for (auto* p : t.params()) p->value.setZero();
  for (double p : t.predict({seq_of({4, 5}, 16)})) EXPECT_EQ(p, 0.5);
}

TEST(Predict, BatchOfOneMatchesBatchAndPadInvariance) {
  StructuredConfig sc;
  sc.cardinalities = {3};
  sc.n_continuous = 1;
  CombinedModel model(MlpStructuredModel(sc, 5), TransformerEncoder(small_encoder(), 6), 4, 7);
  CombinedInput x;
  x.structured.continuous = Matrix(3, 1);
  x.structured.continuous << 0.1, 0.5, 0.9;
  x.structured.codes = Eigen::MatrixXi(3, 1);
  x.structured.codes << 0, 2, 3;
  x.text = {seq_of({4, 5}, 16), seq_of({6}, 16), seq_of({7, 8, 9}, 16)};
  auto all = model.predict(x);
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<std::size_t> one = {i};
    EXPECT_NEAR(model.predict(x.take(one))[0], all[i], 1e-6);
  }
  TransformerEncoder enc(small_encoder(), 9);
  Eigen::MatrixXd a = enc.pooled(seq_of({4, 5, 6}, 8));
  Eigen::MatrixXd b = enc.pooled(seq_of({4, 5, 6}, 16));
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
}

TEST(TrainStructured, SeparableFeatureAndZeroEpochs) {
  StructuredConfig sc;
  sc.cardinalities = {};
  sc.n_continuous = 1;
  Rng rng(12);
  StructuredInput x;
  x.continuous.resize(400, 1);
  x.codes.resize(400, 0);
  std::vector<int> y(400);
  for (int i = 0; i < 400; ++i) {
    x.continuous(i, 0) = uniform01(rng);
    y[i] = x.continuous(i, 0) > 0.4 ? 1 : 0;
  }
  MlpStructuredModel untouched(sc, 13);
  MlpStructuredModel zero = untouched;
  FitOptions none;
  none.epochs = 0;
  train_structured(zero, x, y, none);
  EXPECT_EQ(param_hash(zero.params()), param_hash(untouched.params()));

  MlpStructuredModel m(sc, 13);
  FitOptions opt;
  opt.seed = 5;
  auto report = train_structured(m, x, y, opt);
  EXPECT_GE(eval::auc(m.predict(x), y), 0.99);
  // per-epoch mean loss decreases overall
  EXPECT_LT(report.epoch_loss.back(), report.epoch_loss.front());
  MlpStructuredModel again(sc, 13);
  train_structured(again, x, y, opt);
  EXPECT_EQ(param_hash(again.params()), param_hash(m.params()));
}

TEST(Pretrain, MaskSelectionSkipsPadAndCls) {
  Rng rng(14);
  auto s = seq_of({4, 5, 6, 7, 8}, 12);
  for (int trial = 0; trial < 200; ++trial) {
    for (auto p : select_mask_positions(s, 0.9, rng)) {
      EXPECT_GE(p, 1u);
      EXPECT_EQ(s.mask[p], 1);
    }
  }
}

TEST(Pretrain, ZeroMaskProbIsNoOpAndEmptyCorpusThrows) {
  TransformerEncoder enc(small_encoder(), 15);
  std::string before = param_hash(enc.params());
  PretrainOptions opt;
  opt.mask_prob = 0;
  auto r = pretrain_encoder(enc, {seq_of({4, 5}, 16)}, opt);
  EXPECT_EQ(param_hash(enc.params()), before);
  EXPECT_EQ(r.masked_tokens, 0u);
  EXPECT_THROW(pretrain_encoder(enc, {}, PretrainOptions{}), ValidationError);
}

TEST(Pretrain, MemorizesRepeatedSentence) {
  TransformerEncoder enc(small_encoder(), 16);
  Corpus corpus(64, seq_of({4, 5, 6, 7, 8, 9}, 16));
  PretrainOptions opt;
  opt.epochs = 40;
  opt.batch_size = 16;
  opt.lr = 5e-3;
  opt.mask_prob = 0.15;
  auto r = pretrain_encoder(enc, corpus, opt);
  EXPECT_GE(r.epoch_accuracy.back(), 0.95);
}

TEST(FineTune, FrozenEncoderWithZeroUnfrozenBlocks) {
  TextModel model(TransformerEncoder(small_encoder(), 17), 4, 18);
  Corpus docs = {seq_of({4, 5}, 16), seq_of({6, 7}, 16), seq_of({4, 9}, 16), seq_of({10, 7}, 16)};
  std::vector<int> y = {1, 0, 1, 0};
  std::string enc_before = param_hash(model.encoder().params());
  std::string head_before = param_hash(model.head_params());
  FineTuneOptions opt;
  opt.unfreeze_last_k = 0;
  opt.epochs = 3;
  opt.batch_size = 2;
  fine_tune_text(model, docs, y, opt);
  EXPECT_EQ(param_hash(model.encoder().params()), enc_before);
  EXPECT_NE(param_hash(model.head_params()), head_before);
}

TEST(FineTune, PartialUnfreezeKeepsEarlierBlocksBitIdentical) {
  TextModel model(TransformerEncoder(small_encoder(), 19), 4, 20);
  Corpus docs = {seq_of({4, 5}, 16), seq_of({6, 7}, 16), seq_of({4, 9}, 16), seq_of({10, 7}, 16)};
  std::vector<int> y = {1, 0, 1, 0};
  std::string block0 = param_hash(model.encoder().block_params(0));
  std::string emb = param_hash(model.encoder().embedding_params());
  std::string block1 = param_hash(model.encoder().block_params(1));
  FineTuneOptions opt;
  opt.unfreeze_last_k = 1;
  opt.epochs = 2;
  opt.batch_size = 2;
  fine_tune_text(model, docs, y, opt);
  EXPECT_EQ(param_hash(model.encoder().block_params(0)), block0);
  EXPECT_EQ(param_hash(model.encoder().embedding_params()), emb);
  EXPECT_NE(param_hash(model.encoder().block_params(1)), block1);

  opt.unfreeze_last_k = 3;
  EXPECT_THROW(fine_tune_text(model, docs, y, opt), ValidationError);
}

TEST(Combined, PhaseOneFreezesTailsAndEmptyScheduleThrows) {
  StructuredConfig sc;
  sc.cardinalities = {3};
  sc.n_continuous = 1;
  MlpStructuredModel s(sc, 40);
  TextModel t(TransformerEncoder(small_encoder(), 41), 4, 42);
  CombinedInput x;
  x.structured.continuous = Matrix(4, 1);
  x.structured.continuous << 0.1, 0.7, 0.3, 0.9;
  x.structured.codes = Eigen::MatrixXi(4, 1);
  x.structured.codes << 1, 2, 3, 1;
  x.text = {seq_of({4, 5}, 16), seq_of({6, 7}, 16), seq_of({4, 9}, 16), seq_of({10, 7}, 16)};
  std::vector<int> y = {1, 0, 1, 0};
  TrainSchedule sched;
  sched.phases = {{PhaseScope::FusionHead, 1e-2, 3, 2}, {PhaseScope::All, 1e-3, 1, 2}};
  CombinedReport report;
  auto model = build_and_train_combined(s, t, 6, x, y, sched, 43, &report);
  ASSERT_EQ(report.tail_hash_before.size(), 2u);
  EXPECT_EQ(report.tail_hash_before[0], report.tail_hash_after[0]);
  EXPECT_NE(report.tail_hash_before[1], report.tail_hash_after[1]);
  EXPECT_EQ(model.fusion_input_dim(), s.representation_dim() + t.encoder().dim());

  TrainSchedule empty;
  empty.phases.clear();
  EXPECT_THROW(build_and_train_combined(s, t, 6, x, y, empty, 43), ValidationError);
}

TEST(Checkpoint, RoundTripPreservesPredictions) {
  StructuredConfig sc;
  sc.cardinalities = {3, 2};
  sc.n_continuous = 2;
  CombinedModel model(MlpStructuredModel(sc, 50), TransformerEncoder(small_encoder(), 51), 4, 52);
  auto restored = CombinedModel::from_json(nlohmann::json::parse(model.to_json().dump()));
  EXPECT_EQ(param_hash(restored.params()), param_hash(model.params()));
  TextModel t(TransformerEncoder(small_encoder(), 53), 4, 54);
  auto t2 = TextModel::from_json(t.to_json());
  EXPECT_EQ(param_hash(t2.params()), param_hash(t.params()));
}
