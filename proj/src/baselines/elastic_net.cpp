#include "lendtext/baselines/elastic_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lendtext/core/error.hpp"
#include "lendtext/eval/metrics.hpp"

namespace lendtext::baselines {

namespace {

// log(1 + exp(eta)) without overflow
double softplus(double eta) {
  return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  double e = std::exp(eta);
  return e / (1.0 + e);
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

void check_inputs(const Eigen::MatrixXd& x, std::span<const int> y) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw ValidationError("design matrix rows differ from label count");
  }
  if (!x.allFinite()) throw ValidationError("design matrix contains non-finite values");
  check_binary_labels(y);
}

double data_loss(const Eigen::VectorXd& eta, std::span<const int> y) {
  double s = 0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) s += softplus(eta[i]) - y[i] * eta[i];
  return s / static_cast<double>(eta.size());
}

double penalty(double w, double l1_ratio, double lambda) {
  return lambda * (l1_ratio * std::abs(w) + 0.5 * (1.0 - l1_ratio) * w * w);
}

}  // namespace

nlohmann::json ElasticNetModel::to_json() const {
  return {{"format", "lendtext.elastic_net"},
          {"version", 1},
          {"dim", dim()},
          {"l1_ratio", l1_ratio},
          {"lambda", lambda},
          {"intercept", b},
          {"weights", std::vector<double>(w.data(), w.data() + w.size())}};
}

ElasticNetModel ElasticNetModel::from_json(const nlohmann::json& j) {
  ElasticNetModel m;
  auto w = j.at("weights").get<std::vector<double>>();
  m.w = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  m.b = j.at("intercept").get<double>();
  m.l1_ratio = j.at("l1_ratio").get<double>();
  m.lambda = j.at("lambda").get<double>();
  return m;
}

double elastic_net_objective(const ElasticNetModel& m, const Eigen::MatrixXd& x,
                             std::span<const int> y) {
  Eigen::VectorXd eta = (x * m.w).array() + m.b;
  double obj = data_loss(eta, y);
  for (Eigen::Index j = 0; j < m.w.size(); ++j) obj += penalty(m.w[j], m.l1_ratio, m.lambda);
  return obj;
}

double lambda_max(const Eigen::MatrixXd& x, std::span<const int> y) {
  check_inputs(x, y);
  const double n = static_cast<double>(y.size());
  double ybar = 0;
  for (int v : y) ybar += v;
  ybar /= n;
  double best = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double g = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) g += x(i, j) * (y[i] - ybar);
    best = std::max(best, std::abs(g) / n);
  }
  // Relative pad so solver rounding at the boundary cannot leave a weight at one ulp.
  return best * (1.0 + 1e-12);
}

std::vector<double> lambda_path(const Eigen::MatrixXd& x, std::span<const int> y, int n_lambda,
                                double decades) {
  double top = lambda_max(x, y);
  if (top <= 0) top = 1e-3;
  std::vector<double> path;
  for (int k = 0; k < n_lambda; ++k) {
    double frac = n_lambda > 1 ? static_cast<double>(k) / (n_lambda - 1) : 0.0;
    path.push_back(top * std::pow(10.0, -decades * frac));
  }
  return path;
}

ElasticNetModel fit_elastic_net(const Eigen::MatrixXd& x, std::span<const int> y, double l1_ratio,
                                double lambda, const ElasticNetModel* warm_start,
                                const CoordinateDescentOptions& options, FitTrace* trace) {
  check_inputs(x, y);
  if (!(l1_ratio >= 0 && l1_ratio <= 1)) throw ValidationError("l1_ratio must lie in [0, 1]");
  if (!(lambda >= 0)) throw ValidationError("lambda must be non-negative");
  const Eigen::Index n = x.rows(), d = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  ElasticNetModel m;
  m.l1_ratio = l1_ratio;
  m.lambda = lambda;
  if (warm_start && warm_start->w.size() == d) {
    m.w = warm_start->w;
    m.b = warm_start->b;
  } else {
    double ybar = 0;
    for (int v : y) ybar += v;
    ybar *= inv_n;
    m.w = Eigen::VectorXd::Zero(d);
    m.b = std::log(ybar / (1.0 - ybar));
  }
  Eigen::VectorXd eta = (x * m.w).array() + m.b;
  const double l1 = lambda * l1_ratio;
  const double l2 = lambda * (1.0 - l1_ratio);
  auto total_penalty = [&](const Eigen::VectorXd& w) {
    double s = 0;
    for (Eigen::Index j = 0; j < d; ++j) s += penalty(w[j], l1_ratio, lambda);
    return s;
  };
  double obj = data_loss(eta, y) + total_penalty(m.w);

  Eigen::VectorXd p(n), wts(n), resid(n), g(d), v(d), trial_w(d), trial_eta(n);
  Eigen::MatrixXd gram(d, d);
  Eigen::VectorXd gram_b(d);
  int sweeps = 0;
  while (sweeps < options.max_sweeps) {
    ++sweeps;
    // Quadratic model of the data loss at the current point.
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = sigmoid(eta[i]);
      wts[i] = p[i] * (1.0 - p[i]);
      resid[i] = p[i] - y[i];
    }
    g.noalias() = x.transpose() * resid * inv_n;
    const double g_b = resid.sum() * inv_n;
    Eigen::MatrixXd xs = x.array().colwise() * wts.array().sqrt();
    gram.setZero();
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xs.transpose(), inv_n);
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    gram_b.noalias() = x.transpose() * wts * inv_n;
    const double h_b = wts.sum() * inv_n;

    // Coordinate descent on the penalized quadratic model; dv = v - w.
    v = m.w;
    double vb = m.b;
    Eigen::VectorXd dv = Eigen::VectorXd::Zero(d);
    double dvb = 0;
    const double inner_tol = std::max(options.tolerance * 1e-2, 1e-15);
    for (int inner = 0; inner < 10000; ++inner) {
      double max_step = 0;
      if (h_b > 0) {
        double grad = g_b + gram_b.dot(dv) + h_b * dvb;
        double step = -grad / h_b;
        vb += step;
        dvb += step;
        max_step = std::abs(step) * std::sqrt(h_b);
      }
      for (Eigen::Index j = 0; j < d; ++j) {
        const double hjj = gram(j, j);
        const double denom = hjj + l2;
        if (denom <= 0) continue;
        double grad = g[j] + gram.col(j).dot(dv) + gram_b[j] * dvb;
        double target = soft_threshold(hjj * v[j] - grad, l1) / denom;
        double step = target - v[j];
        if (step == 0) continue;
        v[j] = target;
        dv[j] += step;
        max_step = std::max(max_step, std::abs(step) * std::sqrt(std::max(hjj, 1e-12)));
      }
      if (max_step < inner_tol) break;
    }

    // Backtracking on the full step keeps the objective non-increasing.
    const double pen_old = total_penalty(m.w);
    const double decrease = g.dot(dv) + g_b * dvb + total_penalty(v) - pen_old;
    double t = 1.0, new_obj = obj;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      trial_w = m.w + t * dv;
      const double trial_b = m.b + t * dvb;
      trial_eta = (x * trial_w).array() + trial_b;
      new_obj = data_loss(trial_eta, y) + total_penalty(trial_w);
      if (new_obj <= obj + 1e-4 * t * std::min(decrease, 0.0)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    double scaled = std::abs(t * dvb) * std::sqrt(h_b);
    for (Eigen::Index j = 0; j < d; ++j)
      scaled = std::max(scaled, std::abs(t * dv[j]) * std::sqrt(std::max(gram(j, j), 1e-12)));
    if (accepted) {
      m.w = trial_w;
      m.b += t * dvb;
      eta.swap(trial_eta);
      obj = new_obj;
    }
    if (trace) trace->objective.push_back(obj);
    if (!accepted || scaled < options.tolerance) break;
  }
  if (trace) trace->sweeps = sweeps;
  if (!m.w.allFinite() || !std::isfinite(m.b)) {
    throw NumericalError("elastic net coordinate descent diverged");
  }
  return m;
}

double kkt_residual(const ElasticNetModel& m, const Eigen::MatrixXd& x, std::span<const int> y) {
  const Eigen::Index n = x.rows();
  Eigen::VectorXd eta = (x * m.w).array() + m.b;
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) r[i] = sigmoid(eta[i]) - y[i];
  Eigen::VectorXd g = x.transpose() * r / static_cast<double>(n);
  const double l1 = m.lambda * m.l1_ratio;
  const double l2 = m.lambda * (1.0 - m.l1_ratio);
  double worst = std::abs(r.mean());
  for (Eigen::Index j = 0; j < m.w.size(); ++j) {
    double v;
    if (m.w[j] != 0) {
      v = std::abs(g[j] + l2 * m.w[j] + l1 * (m.w[j] > 0 ? 1.0 : -1.0));
    } else {
      v = std::max(0.0, std::abs(g[j]) - l1);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

std::vector<double> predict_linear(const ElasticNetModel& m, const Eigen::MatrixXd& x) {
  if (x.cols() != m.w.size()) throw ValidationError("predict_linear: column count mismatch");
  Eigen::VectorXd eta = (x * m.w).array() + m.b;
  std::vector<double> p(static_cast<std::size_t>(eta.size()));
  for (Eigen::Index i = 0; i < eta.size(); ++i) p[i] = sigmoid(eta[i]);
  return p;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
  return out;
}

}  // namespace

std::pair<ElasticNetModel, CvSearchReport> train_elastic_net(const Eigen::MatrixXd& x,
                                                             std::span<const int> y,
                                                             const ElasticNetSearch& search) {
  check_inputs(x, y);
  if (search.l1_ratios.empty()) throw ValidationError("elastic net grid is empty");
  const auto path = lambda_path(x, y, search.n_lambda, search.decades);
  const auto folds = stratified_folds(y, search.folds, search.seed);

  CvSearchReport report;
  report.model = "elastic_net";
  report.n_folds = search.folds;
  for (double a : search.l1_ratios) {
    for (double lam : path) {
      CvCandidate c;
      c.params = {{"l1_ratio", a}, {"lambda", lam}};
      report.candidates.push_back(std::move(c));
    }
  }

  CoordinateDescentOptions cv_options;
  cv_options.tolerance = 1e-7;
  for (int f = 0; f < search.folds; ++f) {
    std::vector<Eigen::Index> tr, va;
    for (std::size_t i = 0; i < folds.size(); ++i)
      (folds[i] == f ? va : tr).push_back(static_cast<Eigen::Index>(i));
    Eigen::MatrixXd xtr = take_rows(x, tr), xva = take_rows(x, va);
    std::vector<int> ytr, yva;
    for (auto i : tr) ytr.push_back(y[i]);
    for (auto i : va) yva.push_back(y[i]);
    std::size_t cand = 0;
    for (double a : search.l1_ratios) {
      ElasticNetModel warm;
      bool have_warm = false;
      for (double lam : path) {
        auto m = fit_elastic_net(xtr, ytr, a, lam, have_warm ? &warm : nullptr, cv_options);
        warm = m;
        have_warm = true;
        report.candidates[cand++].fold_auc.push_back(eval::auc(predict_linear(m, xva), yva));
      }
    }
  }
  // Ties go to the larger lambda (candidates are enumerated with lambda descending).
  double best = -1;
  for (std::size_t c = 0; c < report.candidates.size(); ++c) {
    summarize(report.candidates[c]);
    const auto& cur = report.candidates[c];
    if (cur.mean_auc > best) {
      best = cur.mean_auc;
      report.chosen = c;
    } else if (cur.mean_auc == best &&
               cur.params["lambda"].get<double>() >
                   report.candidates[report.chosen].params["lambda"].get<double>()) {
      report.chosen = c;
    }
  }
  const double a = report.candidates[report.chosen].params["l1_ratio"].get<double>();
  const double chosen_lambda = report.candidates[report.chosen].params["lambda"].get<double>();
  ElasticNetModel warm;
  bool have_warm = false;
  for (double lam : path) {
    if (lam < chosen_lambda) break;
    warm = fit_elastic_net(x, y, a, lam, have_warm ? &warm : nullptr);
    have_warm = true;
  }
  return {warm, report};
}

}  // namespace lendtext::baselines
