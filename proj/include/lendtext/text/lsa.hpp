#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lendtext/text/tfidf.hpp"

namespace lendtext::text {

struct LsaOptions {
  double variance_target = 0.94;
  std::size_t k_max = 250;
  std::optional<std::size_t> k_override;  // fixes k, ignoring the variance target
};

// Truncated SVD of a (documents x terms) TF-IDF matrix.
struct LsaModel {
  TfidfModel tfidf;
  Eigen::MatrixXd components;               // k x |V|, orthonormal rows
  std::vector<double> singular_values;      // all computed values, non-increasing
  std::vector<double> explained_variance;   // sigma_i^2 / ||A||_F^2, same length
  std::size_t k = 0;
  bool capped = false;  // k_max bound the variance-driven choice

  double cumulative_variance(std::size_t rank) const;
  Eigen::VectorXd project(const Eigen::VectorXd& doc_vector) const;
  Eigen::VectorXd project(const SparseVector& doc_vector) const;
  Eigen::VectorXd project_document(const Document& doc) const;

  nlohmann::json to_json() const;
  static LsaModel from_json(const nlohmann::json& j);
};

// Smallest k whose cumulative explained variance reaches the target. Throws
// ValidationError on an all-zero matrix.
LsaModel fit_lsa(const Eigen::MatrixXd& tfidf_matrix, const LsaOptions& options,
                 TfidfModel tfidf = {});

// Minimal rank whose cumulative fraction reaches target (within 1e-12).
std::size_t choose_rank(const std::vector<double>& explained, double target);

}  // namespace lendtext::text
