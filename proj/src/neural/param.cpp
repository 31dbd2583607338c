#include "lendtext/neural/param.hpp"

#include <cmath>
#include <cstring>

#include "lendtext/core/error.hpp"
#include "lendtext/core/hash.hpp"

namespace lendtext::neural {

void Param::resize(Eigen::Index rows, Eigen::Index cols) {
  value = Matrix::Zero(rows, cols);
  grad = Matrix::Zero(rows, cols);
}

void zero_grads(const ParamList& params) {
  for (auto* p : params) p->zero_grad();
}

void set_trainable(const ParamList& params, bool trainable) {
  for (auto* p : params) p->trainable = trainable;
}

void init_glorot(Param& w, Rng& rng) {
  init_normal(w, std::sqrt(2.0 / static_cast<double>(w.value.rows() + w.value.cols())), rng);
}

void init_normal(Param& w, double stddev, Rng& rng) {
  for (Eigen::Index j = 0; j < w.value.cols(); ++j)
    for (Eigen::Index i = 0; i < w.value.rows(); ++i) w.value(i, j) = stddev * standard_normal(rng);
}

std::string param_hash(const ParamList& params) {
  std::string bytes;
  for (const auto* p : params) {
    bytes += p->name;
    bytes.push_back('\0');
    std::int64_t shape[2] = {p->value.rows(), p->value.cols()};
    bytes.append(reinterpret_cast<const char*>(shape), sizeof(shape));
    bytes.append(reinterpret_cast<const char*>(p->value.data()),
                 sizeof(double) * static_cast<std::size_t>(p->value.size()));
  }
  return sha256_hex(bytes);
}

nlohmann::json params_to_json(const ParamList& params) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto* p : params) {
    std::vector<double> data(p->value.data(), p->value.data() + p->value.size());
    out.push_back({{"name", p->name},
                   {"rows", p->value.rows()},
                   {"cols", p->value.cols()},
                   {"data_col_major", data}});
  }
  return out;
}

void params_from_json(const ParamList& params, const nlohmann::json& j) {
  if (j.size() != params.size()) throw SchemaError("checkpoint: parameter count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& e = j[k];
    auto* p = params[k];
    if (e.at("name").get<std::string>() != p->name || e.at("rows").get<Eigen::Index>() != p->value.rows() ||
        e.at("cols").get<Eigen::Index>() != p->value.cols()) {
      throw SchemaError("checkpoint: parameter '" + p->name + "' does not match the architecture");
    }
    auto data = e.at("data_col_major").get<std::vector<double>>();
    std::memcpy(p->value.data(), data.data(), sizeof(double) * data.size());
  }
}

Adam::Adam(ParamList params, AdamOptions options) : params_(std::move(params)), opt_(options) {
  if (!(opt_.lr > 0)) throw ValidationError("learning rate must be positive");
  for (auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  ++t_;
  double scale = 1.0;
  if (opt_.clip_norm > 0) {
    double sq = 0;
    for (auto* p : params_)
      if (p->trainable) sq += p->grad.squaredNorm();
    double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) throw NumericalError("non-finite gradient norm");
    if (norm > opt_.clip_norm) scale = opt_.clip_norm / norm;
  }
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto* p = params_[k];
    if (!p->trainable) continue;
    m_[k] = opt_.beta1 * m_[k] + (1 - opt_.beta1) * scale * p->grad;
    v_[k] = opt_.beta2 * v_[k] + (1 - opt_.beta2) * (scale * p->grad).cwiseAbs2();
    p->value.array() -= opt_.lr * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + opt_.eps);
  }
}

}  // namespace lendtext::neural
