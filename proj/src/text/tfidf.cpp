#include "lendtext/text/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lendtext::text {

nlohmann::json TfidfModel::to_json() const {
  return {{"format", "lendtext.tfidf"}, {"version", 1},
          {"n_documents", n_documents}, {"dim", dim()},
          {"vocabulary", vocab.to_json()}, {"idf", idf}};
}

TfidfModel TfidfModel::from_json(const nlohmann::json& j) {
  TfidfModel m;
  m.vocab = Vocabulary::from_json(j.at("vocabulary"));
  m.idf = j.at("idf").get<std::vector<double>>();
  m.n_documents = j.at("n_documents").get<std::size_t>();
  return m;
}

TfidfModel fit_tfidf(const std::vector<Document>& docs, const Vocabulary& vocab) {
  TfidfModel m;
  m.vocab = vocab;
  m.n_documents = docs.size();
  std::vector<std::size_t> df(vocab.size(), 0);
  for (const auto& doc : docs) {
    std::vector<int> seen;
    for (const auto& t : doc) {
      int i = vocab.find(t);
      if (i >= 0) seen.push_back(i);
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (int i : seen) ++df[i];
  }
  const double n = static_cast<double>(docs.size());
  m.idf.resize(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    m.idf[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i]))) + 1.0;
  }
  return m;
}

SparseVector transform_tfidf(const TfidfModel& model, const Document& doc) {
  std::map<int, double> tf;
  for (const auto& t : doc) {
    int i = model.vocab.find(t);
    if (i >= 0) tf[i] += 1.0;
  }
  SparseVector v;
  double norm2 = 0;
  for (auto [i, c] : tf) {
    double w = c * model.idf[i];
    v.emplace_back(i, w);
    norm2 += w * w;
  }
  if (norm2 > 0) {
    double inv = 1.0 / std::sqrt(norm2);
    for (auto& entry : v) entry.second *= inv;
  }
  return v;
}

Eigen::VectorXd to_dense(const SparseVector& v, std::size_t dim) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (auto [i, w] : v) out[i] = w;
  return out;
}

Eigen::MatrixXd tfidf_matrix(const TfidfModel& model, const std::vector<Document>& docs) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()),
                                            static_cast<Eigen::Index>(model.dim()));
  for (std::size_t r = 0; r < docs.size(); ++r) {
    for (auto [i, w] : transform_tfidf(model, docs[r])) m(static_cast<Eigen::Index>(r), i) = w;
  }
  return m;
}

}  // namespace lendtext::text
