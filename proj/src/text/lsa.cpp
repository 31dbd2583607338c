#include "lendtext/text/lsa.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "lendtext/core/error.hpp"

namespace lendtext::text {

double LsaModel::cumulative_variance(std::size_t rank) const {
  double acc = 0;
  for (std::size_t i = 0; i < rank && i < explained_variance.size(); ++i) {
    acc += explained_variance[i];
  }
  return acc;
}

Eigen::VectorXd LsaModel::project(const Eigen::VectorXd& doc_vector) const {
  return components * doc_vector;
}

Eigen::VectorXd LsaModel::project(const SparseVector& doc_vector) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(components.rows());
  for (auto [i, w] : doc_vector) out += w * components.col(i);
  return out;
}

Eigen::VectorXd LsaModel::project_document(const Document& doc) const {
  return project(transform_tfidf(tfidf, doc));
}

std::size_t choose_rank(const std::vector<double>& explained, double target) {
  double acc = 0;
  for (std::size_t i = 0; i < explained.size(); ++i) {
    acc += explained[i];
    if (acc >= target - 1e-12) return i + 1;
  }
  return explained.size();
}

LsaModel fit_lsa(const Eigen::MatrixXd& a, const LsaOptions& options, TfidfModel tfidf) {
  const double total = a.squaredNorm();
  if (!(total > 0)) throw ValidationError("fit_lsa: TF-IDF matrix is all zero");
  const auto n_terms = static_cast<std::size_t>(a.cols());
  const auto max_rank = std::min<std::size_t>(a.rows(), a.cols());

  // Right singular vectors are the eigenvectors of the term Gram matrix.
  Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericalError("fit_lsa: eigensolver failed");

  std::vector<Eigen::Index> order(n_terms);
  std::iota(order.begin(), order.end(), 0);
  const auto& values = eig.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return values[x] > values[y]; });

  LsaModel m;
  m.tfidf = std::move(tfidf);
  for (std::size_t i = 0; i < max_rank; ++i) {
    double lambda = std::max(0.0, values[order[i]]);
    m.singular_values.push_back(std::sqrt(lambda));
    m.explained_variance.push_back(lambda / total);
  }

  std::size_t k;
  if (options.k_override) {
    k = std::min(*options.k_override, max_rank);
  } else {
    k = choose_rank(m.explained_variance, options.variance_target);
    if (k > options.k_max) {
      std::cerr << "warning: LSA variance target " << options.variance_target << " needs k=" << k
                << ", capped at k_max=" << options.k_max << "\n";
      k = options.k_max;
      m.capped = true;
    }
  }
  if (k == 0) k = 1;
  m.k = k;
  m.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n_terms));
  for (std::size_t i = 0; i < k; ++i) {
    Eigen::VectorXd v = eig.eigenvectors().col(order[i]);
    // sign convention: largest-magnitude entry positive
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    m.components.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  return m;
}

nlohmann::json LsaModel::to_json() const {
  std::vector<double> flat(components.data(), components.data() + components.size());
  return {{"format", "lendtext.lsa"},
          {"version", 1},
          {"k", k},
          {"n_terms", components.cols()},
          {"capped", capped},
          {"singular_values", singular_values},
          {"explained_variance", explained_variance},
          {"components_col_major", flat},
          {"tfidf", tfidf.to_json()}};
}

LsaModel LsaModel::from_json(const nlohmann::json& j) {
  if (j.at("format") != "lendtext.lsa" || j.at("version") != 1) {
    throw ValidationError("not a lendtext.lsa v1 document");
  }
  LsaModel m;
  m.k = j.at("k").get<std::size_t>();
  m.capped = j.at("capped").get<bool>();
  m.singular_values = j.at("singular_values").get<std::vector<double>>();
  m.explained_variance = j.at("explained_variance").get<std::vector<double>>();
  auto flat = j.at("components_col_major").get<std::vector<double>>();
  auto cols = j.at("n_terms").get<Eigen::Index>();
  m.components = Eigen::Map<Eigen::MatrixXd>(flat.data(), static_cast<Eigen::Index>(m.k), cols);
  m.tfidf = TfidfModel::from_json(j.at("tfidf"));
  return m;
}

}  // namespace lendtext::text
