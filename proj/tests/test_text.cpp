#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "lendtext/core/error.hpp"
#include "lendtext/core/rng.hpp"
#include "lendtext/text/clean.hpp"
#include "lendtext/text/lsa.hpp"
#include "lendtext/text/stemmer.hpp"
#include "lendtext/text/tfidf.hpp"
#include "lendtext/text/token_encoder.hpp"
#include "lendtext/text/vocabulary.hpp"

using namespace lendtext;
using namespace lendtext::text;

namespace {

std::vector<Document> docs_with_term(std::size_t n, std::size_t with, const std::string& term) {
  std::vector<Document> docs(n, Document{"filler"});
  for (std::size_t i = 0; i < with; ++i) docs[i].push_back(term);
  return docs;
}

}  // namespace

TEST(Clean, WhitespacePunctuationAndEmpty) {
  EXPECT_EQ(clean_text("  Two   spaces "), "two spaces");
  EXPECT_EQ(clean_text(""), "");
  EXPECT_EQ(clean_text("Buy, now."), "buy , now .");
  EXPECT_EQ(tokenize("buy , now ."), (std::vector<std::string>{"buy", ",", "now", "."}));
  EXPECT_EQ(word_tokens("Buy, now."), (std::vector<std::string>{"buy", "now"}));
}

TEST(Vocabulary, DocumentFrequencyBand) {
  auto everywhere = build_vocabulary(docs_with_term(100, 7, "keep"), 0.05, 0.10);
  EXPECT_GE(everywhere.find("keep"), 0);
  EXPECT_LT(everywhere.find("filler"), 0);  // df 1.0 > max_df

  StopwordSet stop = {"the"};
  auto docs = docs_with_term(100, 8, "the");
  docs[50].push_back("kept");
  for (int i = 51; i < 57; ++i) docs[i].push_back("kept");
  auto v = build_vocabulary(docs, 0.05, 0.10, stop);
  EXPECT_LT(v.find("the"), 0);
  EXPECT_GE(v.find("kept"), 0);

  EXPECT_THROW(build_vocabulary(docs_with_term(10, 0, "x"), 0.05, 0.10), ValidationError);
}

TEST(Tfidf, HandComputedTwoDocCorpus) {
  std::vector<Document> docs = {{"a", "b"}, {"a"}};
  auto vocab = build_vocabulary(docs, 0.0, 1.0);
  auto model = fit_tfidf(docs, vocab);
  ASSERT_EQ(vocab.terms, (std::vector<std::string>{"a", "b"}));
  EXPECT_NEAR(model.idf[0], 1.0, 1e-12);
  EXPECT_NEAR(model.idf[1], std::log(1.5) + 1.0, 1e-12);
  auto dense = to_dense(transform_tfidf(model, docs[0]), 2);
  const double norm = std::hypot(1.0, std::log(1.5) + 1.0);
  EXPECT_NEAR(dense[0], 1.0 / norm, 1e-12);
  EXPECT_NEAR(dense[1], (std::log(1.5) + 1.0) / norm, 1e-12);
  EXPECT_NEAR(dense[0], 0.580, 5e-4);
  EXPECT_NEAR(dense[1], 0.815, 5e-4);

  EXPECT_TRUE(transform_tfidf(model, {"zzz"}).empty());
  auto doubled = to_dense(transform_tfidf(model, {"a", "a", "b"}), 2);
  EXPECT_NEAR(doubled[0] / doubled[1], 2.0 / (std::log(1.5) + 1.0), 1e-12);
}

TEST(Lsa, RankOneAndFullRank) {
  Eigen::MatrixXd r1 = Eigen::VectorXd::LinSpaced(6, 1, 6) * Eigen::RowVectorXd::LinSpaced(4, 1, 4);
  auto m = fit_lsa(r1, {});
  EXPECT_EQ(m.k, 1u);
  EXPECT_NEAR(m.cumulative_variance(1), 1.0, 1e-12);

  Rng rng(3);
  Eigen::MatrixXd full(8, 5);
  for (Eigen::Index i = 0; i < full.size(); ++i) full.data()[i] = uniform01(rng);
  LsaOptions opt;
  opt.variance_target = 1.0;
  EXPECT_EQ(fit_lsa(full, opt).k, 5u);
  EXPECT_THROW(fit_lsa(Eigen::MatrixXd::Zero(3, 3), {}), ValidationError);
}

TEST(Lsa, MatchesDenseSvdOracle) {
  Rng rng(77);
  Eigen::MatrixXd a(50, 30);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = uniform01(rng);
  LsaOptions opt;
  opt.variance_target = 0.9;
  auto m = fit_lsa(a, opt);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  double tail = sv.tail(sv.size() - static_cast<Eigen::Index>(m.k)).squaredNorm();
  Eigen::MatrixXd recon = a * m.components.transpose() * m.components;
  EXPECT_NEAR((a - recon).squaredNorm(), tail, 1e-8);
  Eigen::MatrixXd gram = m.components * m.components.transpose();
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(m.k, m.k)).cwiseAbs().maxCoeff(), 1e-8);
  for (std::size_t i = 1; i < m.singular_values.size(); ++i)
    EXPECT_LE(m.singular_values[i], m.singular_values[i - 1]);
  EXPECT_GE(m.cumulative_variance(m.k), 0.9);
  EXPECT_LT(m.cumulative_variance(m.k - 1), 0.9);
}

TEST(Lsa, KMaxCapsAndFlags) {
  Rng rng(5);
  Eigen::MatrixXd a(20, 10);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = uniform01(rng);
  LsaOptions opt;
  opt.variance_target = 0.999;
  opt.k_max = 2;
  auto m = fit_lsa(a, opt);
  EXPECT_EQ(m.k, 2u);
  EXPECT_TRUE(m.capped);
}

TEST(TokenEncoder, TruncationEmptyAndMask) {
  Document long_doc(600, "w");
  auto vocab = TokenVocabulary::fit({long_doc, {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"}});
  auto seq = encode_for_transformer(long_doc, vocab, 512);
  EXPECT_EQ(seq.ids.size(), 512u);
  EXPECT_EQ(seq.length(), 512u);  // CLS + 511 tokens, 89 dropped

  auto empty = encode_for_transformer({}, vocab, 16);
  EXPECT_EQ(empty.ids[0], kCls);
  EXPECT_EQ(empty.length(), 1u);
  for (std::size_t i = 1; i < 16; ++i) EXPECT_EQ(empty.ids[i], kPad);

  auto ten = encode_for_transformer({"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"}, vocab, 32);
  EXPECT_EQ(ten.length(), 11u);
  EXPECT_EQ(encode_for_transformer({"unseen"}, vocab, 4).ids[1], kUnk);
}

TEST(Stemmer, CommonSuffixes) {
  EXPECT_EQ(stem("loans"), stem("loan"));
  EXPECT_EQ(stem("payments"), stem("payment"));
  EXPECT_EQ(stem("xyz"), "xyz");
}
