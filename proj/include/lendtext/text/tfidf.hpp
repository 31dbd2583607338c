#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lendtext/text/vocabulary.hpp"

namespace lendtext::text {

using SparseVector = std::vector<std::pair<int, double>>;  // (term index, weight), sorted

struct TfidfModel {
  Vocabulary vocab;
  std::vector<double> idf;
  std::size_t n_documents = 0;

  std::size_t dim() const { return vocab.size(); }

  nlohmann::json to_json() const;
  static TfidfModel from_json(const nlohmann::json& j);
};

// idf = ln((1 + N) / (1 + df_count)) + 1
TfidfModel fit_tfidf(const std::vector<Document>& docs, const Vocabulary& vocab);

// Raw term counts times idf, then L2-normalized (all-zero rows stay zero).
SparseVector transform_tfidf(const TfidfModel& model, const Document& doc);
Eigen::VectorXd to_dense(const SparseVector& v, std::size_t dim);
Eigen::MatrixXd tfidf_matrix(const TfidfModel& model, const std::vector<Document>& docs);

}  // namespace lendtext::text
