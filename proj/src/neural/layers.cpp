#include "lendtext/neural/layers.hpp"

#include <cmath>
#include <limits>

#include "lendtext/core/error.hpp"

namespace lendtext::neural {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

void append(ParamList& dst, const ParamList& src) { dst.insert(dst.end(), src.begin(), src.end()); }
}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

Matrix gelu(const Matrix& x) { return x.unaryExpr([](double v) { return gelu(v); }); }

Matrix gelu_backward(const Matrix& x, const Matrix& dy) {
  return dy.cwiseProduct(x.unaryExpr([](double v) { return gelu_grad(v); }));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Dense::Dense(const std::string& name, Eigen::Index in, Eigen::Index out) {
  w.name = name + ".w";
  b.name = name + ".b";
  w.resize(in, out);
  b.resize(1, out);
}

Matrix Dense::forward(const Matrix& x) const {
  if (x.cols() != w.value.rows()) throw ValidationError(w.name + ": input dimension mismatch");
  Matrix y = x * w.value;
  y.rowwise() += b.value.row(0);
  return y;
}

Matrix Dense::backward(const Matrix& x, const Matrix& dy) {
  w.grad.noalias() += x.transpose() * dy;
  b.grad.row(0) += dy.colwise().sum();
  return dy * w.value.transpose();
}

LayerNorm::LayerNorm(const std::string& name, Eigen::Index d) {
  gamma.name = name + ".gamma";
  beta.name = name + ".beta";
  gamma.resize(1, d);
  gamma.value.setOnes();
  beta.resize(1, d);
}

Matrix LayerNorm::forward(const Matrix& x, Cache& cache) const {
  const double d = static_cast<double>(x.cols());
  cache.xhat.resize(x.rows(), x.cols());
  cache.inv_std.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mu = x.row(i).sum() / d;
    double var = (x.row(i).array() - mu).square().sum() / d;
    double inv = 1.0 / std::sqrt(var + kEps);
    cache.inv_std(i) = inv;
    cache.xhat.row(i) = (x.row(i).array() - mu) * inv;
  }
  Matrix y = cache.xhat.array().rowwise() * gamma.value.row(0).array();
  y.rowwise() += beta.value.row(0);
  return y;
}

Matrix LayerNorm::backward(const Matrix& dy, const Cache& cache) {
  gamma.grad.row(0) += dy.cwiseProduct(cache.xhat).colwise().sum();
  beta.grad.row(0) += dy.colwise().sum();
  const double d = static_cast<double>(dy.cols());
  Matrix dxhat = dy.array().rowwise() * gamma.value.row(0).array();
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    double mean_d = dxhat.row(i).sum() / d;
    double mean_dx = dxhat.row(i).dot(cache.xhat.row(i)) / d;
    dx.row(i) = cache.inv_std(i) *
                (dxhat.row(i).array() - mean_d - cache.xhat.row(i).array() * mean_dx);
  }
  return dx;
}

Embedding::Embedding(const std::string& name, Eigen::Index rows, Eigen::Index d) {
  table.name = name + ".table";
  table.resize(rows, d);
}

Matrix Embedding::forward(const std::vector<int>& ids) const {
  Matrix y(static_cast<Eigen::Index>(ids.size()), table.value.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.value.rows()) {
      throw ValidationError(table.name + ": id " + std::to_string(ids[i]) + " out of range");
    }
    y.row(static_cast<Eigen::Index>(i)) = table.value.row(ids[i]);
  }
  return y;
}

void Embedding::backward(const std::vector<int>& ids, const Matrix& dy) {
  for (std::size_t i = 0; i < ids.size(); ++i) table.grad.row(ids[i]) += dy.row(static_cast<Eigen::Index>(i));
}

MultiHeadAttention::MultiHeadAttention(const std::string& name, Eigen::Index d, int h)
    : q(name + ".q", d, d), k(name + ".k", d, d), v(name + ".v", d, d), o(name + ".o", d, d), heads(h) {
  if (h < 1 || d % h != 0) throw ConfigError("model dimension must be divisible by the head count");
}

void MultiHeadAttention::init(Rng& rng) {
  q.init(rng);
  k.init(rng);
  v.init(rng);
  o.init(rng);
}

Matrix MultiHeadAttention::forward(const Matrix& x, Cache& c, const std::vector<int>& key_mask) const {
  const Eigen::Index t = x.rows();
  const Eigen::Index dh = x.cols() / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  c.x = x;
  c.qm = q.forward(x);
  c.km = k.forward(x);
  c.vm = v.forward(x);
  c.concat.resize(t, x.cols());
  c.probs.assign(heads, Matrix());
  for (int h = 0; h < heads; ++h) {
    Matrix s = c.qm.middleCols(h * dh, dh) * c.km.middleCols(h * dh, dh).transpose() * scale;
    Matrix& p = c.probs[h];
    p.resize(t, t);
    for (Eigen::Index i = 0; i < t; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < t; ++j)
        if (key_mask.empty() || key_mask[j]) mx = std::max(mx, s(i, j));
      double z = 0;
      for (Eigen::Index j = 0; j < t; ++j) {
        double e = (key_mask.empty() || key_mask[j]) ? std::exp(s(i, j) - mx) : 0.0;
        p(i, j) = e;
        z += e;
      }
      p.row(i) /= z;
    }
    c.concat.middleCols(h * dh, dh) = p * c.vm.middleCols(h * dh, dh);
  }
  return o.forward(c.concat);
}

Matrix MultiHeadAttention::backward(const Matrix& dy, const Cache& c) {
  const Eigen::Index t = c.x.rows();
  const Eigen::Index dh = c.x.cols() / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix dconcat = o.backward(c.concat, dy);
  Matrix dq(t, c.x.cols()), dk(t, c.x.cols()), dv(t, c.x.cols());
  for (int h = 0; h < heads; ++h) {
    const Matrix& p = c.probs[h];
    auto doh = dconcat.middleCols(h * dh, dh);
    dv.middleCols(h * dh, dh) = p.transpose() * doh;
    Matrix dp = doh * c.vm.middleCols(h * dh, dh).transpose();
    Vector rs = dp.cwiseProduct(p).rowwise().sum();
    Matrix ds = p.cwiseProduct(dp.colwise() - rs) * scale;
    dq.middleCols(h * dh, dh) = ds * c.km.middleCols(h * dh, dh);
    dk.middleCols(h * dh, dh) = ds.transpose() * c.qm.middleCols(h * dh, dh);
  }
  Matrix dx = q.backward(c.x, dq);
  dx += k.backward(c.x, dk);
  dx += v.backward(c.x, dv);
  return dx;
}

ParamList MultiHeadAttention::params() {
  ParamList out;
  append(out, q.params());
  append(out, k.params());
  append(out, v.params());
  append(out, o.params());
  return out;
}

FeedForward::FeedForward(const std::string& name, Eigen::Index d, Eigen::Index hidden)
    : in(name + ".in", d, hidden), out(name + ".out", hidden, d) {}

void FeedForward::init(Rng& rng) {
  in.init(rng);
  out.init(rng);
}

Matrix FeedForward::forward(const Matrix& x, Cache& c) const {
  c.x = x;
  c.pre = in.forward(x);
  return out.forward(gelu(c.pre));
}

Matrix FeedForward::backward(const Matrix& dy, const Cache& c) {
  Matrix dh = out.backward(gelu(c.pre), dy);
  return in.backward(c.x, gelu_backward(c.pre, dh));
}

ParamList FeedForward::params() {
  ParamList p;
  append(p, in.params());
  append(p, out.params());
  return p;
}

EncoderBlock::EncoderBlock(const std::string& name, Eigen::Index d, int heads, Eigen::Index ff)
    : attention(name + ".attention", d, heads),
      ln1(name + ".ln1", d),
      ffn(name + ".ffn", d, ff),
      ln2(name + ".ln2", d) {}

void EncoderBlock::init(Rng& rng) {
  attention.init(rng);
  ffn.init(rng);
}

Matrix EncoderBlock::forward(const Matrix& x, Cache& c, const std::vector<int>& key_mask) const {
  Matrix h = ln1.forward(x + attention.forward(x, c.att, key_mask), c.ln1);
  return ln2.forward(h + ffn.forward(h, c.ffn), c.ln2);
}

Matrix EncoderBlock::backward(const Matrix& dy, const Cache& c) {
  Matrix dr2 = ln2.backward(dy, c.ln2);
  Matrix dh = dr2 + ffn.backward(dr2, c.ffn);
  Matrix dr1 = ln1.backward(dh, c.ln1);
  return dr1 + attention.backward(dr1, c.att);
}

ParamList EncoderBlock::params() {
  ParamList p;
  append(p, attention.params());
  append(p, ln1.params());
  append(p, ffn.params());
  append(p, ln2.params());
  return p;
}

}  // namespace lendtext::neural
