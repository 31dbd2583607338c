#pragma once

#include <string>
#include <vector>

#include "lendtext/neural/param.hpp"

namespace lendtext::neural {

// Rows are samples (or sequence positions); columns are features.

double gelu(double x);
double gelu_grad(double x);
Matrix gelu(const Matrix& x);
// dY * gelu'(X)
Matrix gelu_backward(const Matrix& x, const Matrix& dy);

double sigmoid(double x);
// log(1 + exp(x)) without overflow
double softplus(double x);

struct Dense {
  Param w;  // in x out
  Param b;  // 1 x out

  Dense() = default;
  Dense(const std::string& name, Eigen::Index in, Eigen::Index out);
  void init(Rng& rng) { init_glorot(w, rng); }
  Eigen::Index in_dim() const { return w.value.rows(); }
  Eigen::Index out_dim() const { return w.value.cols(); }

  Matrix forward(const Matrix& x) const;
  // Accumulates parameter gradients; returns dX.
  Matrix backward(const Matrix& x, const Matrix& dy);
  ParamList params() { return {&w, &b}; }
};

struct LayerNorm {
  static constexpr double kEps = 1e-12;
  Param gamma;  // 1 x d
  Param beta;   // 1 x d

  struct Cache {
    Matrix xhat;
    Vector inv_std;
  };

  LayerNorm() = default;
  LayerNorm(const std::string& name, Eigen::Index d);
  Matrix forward(const Matrix& x, Cache& cache) const;
  Matrix backward(const Matrix& dy, const Cache& cache);
  ParamList params() { return {&gamma, &beta}; }
};

struct Embedding {
  Param table;  // rows x d

  Embedding() = default;
  Embedding(const std::string& name, Eigen::Index rows, Eigen::Index d);
  Matrix forward(const std::vector<int>& ids) const;
  void backward(const std::vector<int>& ids, const Matrix& dy);
  ParamList params() { return {&table}; }
};

struct MultiHeadAttention {
  Dense q, k, v, o;
  int heads = 1;

  struct Cache {
    Matrix x, qm, km, vm, concat;
    std::vector<Matrix> probs;  // per head, T x T
  };

  MultiHeadAttention() = default;
  MultiHeadAttention(const std::string& name, Eigen::Index d, int heads);
  void init(Rng& rng);
  // key_mask: empty, or one entry per row of x; 0 excludes that key.
  Matrix forward(const Matrix& x, Cache& cache, const std::vector<int>& key_mask = {}) const;
  Matrix backward(const Matrix& dy, const Cache& cache);
  ParamList params();
};

struct FeedForward {
  Dense in, out;

  struct Cache {
    Matrix x, pre;
  };

  FeedForward() = default;
  FeedForward(const std::string& name, Eigen::Index d, Eigen::Index hidden);
  void init(Rng& rng);
  Matrix forward(const Matrix& x, Cache& cache) const;
  Matrix backward(const Matrix& dy, const Cache& cache);
  ParamList params();
};

// Post-LN block: h = LN1(x + MHA(x)); y = LN2(h + FFN(h)).
struct EncoderBlock {
  MultiHeadAttention attention;
  LayerNorm ln1;
  FeedForward ffn;
  LayerNorm ln2;

  struct Cache {
    MultiHeadAttention::Cache att;
    LayerNorm::Cache ln1, ln2;
    FeedForward::Cache ffn;
  };

  EncoderBlock() = default;
  EncoderBlock(const std::string& name, Eigen::Index d, int heads, Eigen::Index ff);
  void init(Rng& rng);
  Matrix forward(const Matrix& x, Cache& cache, const std::vector<int>& key_mask = {}) const;
  Matrix backward(const Matrix& dy, const Cache& cache);
  ParamList params();
};

}  // namespace lendtext::neural
