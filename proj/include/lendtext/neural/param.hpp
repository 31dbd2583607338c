#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lendtext/core/rng.hpp"

namespace lendtext::neural {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;

  void resize(Eigen::Index rows, Eigen::Index cols);
  void zero_grad() { grad.setZero(); }
};

using ParamList = std::vector<Param*>;

void zero_grads(const ParamList& params);
void set_trainable(const ParamList& params, bool trainable);

// Glorot-normal weights; biases left at zero.
void init_glorot(Param& w, Rng& rng);
void init_normal(Param& w, double stddev, Rng& rng);

// Hash over names, shapes and raw value bytes.
std::string param_hash(const ParamList& params);

nlohmann::json params_to_json(const ParamList& params);
// Shapes and names must match exactly.
void params_from_json(const ParamList& params, const nlohmann::json& j);

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0;  // global gradient-norm clip; 0 disables
};

// Updates trainable parameters only; frozen ones are never written.
class Adam {
 public:
  Adam(ParamList params, AdamOptions options);
  void step();
  long steps() const { return t_; }

 private:
  ParamList params_;
  AdamOptions opt_;
  std::vector<Matrix> m_, v_;
  long t_ = 0;
};

}  // namespace lendtext::neural
