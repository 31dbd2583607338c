#include "lendtext/baselines/rfecv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lendtext/core/error.hpp"
#include "lendtext/core/rng.hpp"
#include "lendtext/eval/metrics.hpp"

namespace lendtext::baselines {

nlohmann::json RfecvReport::to_json() const {
  std::vector<std::string> selected_names;
  for (auto c : selected) selected_names.push_back(feature_names[c]);
  std::vector<std::string> order_names;
  for (auto c : elimination_order) order_names.push_back(feature_names[c]);
  return {{"feature_names", feature_names},
          {"elimination_order", elimination_order},
          {"elimination_order_names", order_names},
          {"fold_elimination_orders", fold_elimination_orders},
          {"mean_auc", mean_auc},
          {"fold_auc", fold_auc},
          {"selected", selected},
          {"selected_names", selected_names},
          {"tolerance", tolerance}};
}

namespace {

Eigen::MatrixXd take(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows,
                     const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r) out(r, c) = x(rows[r], cols[c]);
  return out;
}

ForestParams elimination_params(const RfecvOptions& o, std::uint64_t seed) {
  ForestParams p;
  p.n_trees = o.n_trees;
  p.max_depth = o.max_depth;
  p.threads = o.threads;
  p.seed = seed;
  return p;
}

// Index into `kept` of the least important feature; ties drop the later column.
std::size_t weakest(const std::vector<double>& importance) {
  std::size_t w = 0;
  for (std::size_t k = 1; k < importance.size(); ++k) {
    if (importance[k] <= importance[w]) w = k;
  }
  return w;
}

}  // namespace

RfecvReport rfecv_select(const Eigen::MatrixXd& x, std::span<const int> y,
                         const std::vector<std::string>& feature_names, const RfecvOptions& options) {
  check_binary_labels(y);
  const std::size_t d = static_cast<std::size_t>(x.cols());
  if (feature_names.size() != d) throw ValidationError("rfecv: feature name count mismatch");
  if (d == 0) throw ValidationError("rfecv: no features");

  RfecvReport report;
  report.feature_names = feature_names;
  report.tolerance = options.tolerance;
  const auto folds = stratified_folds(y, options.folds, options.seed);
  report.fold_auc.assign(options.folds, std::vector<double>(d, 0.0));

  for (int f = 0; f < options.folds; ++f) {
    std::vector<Eigen::Index> tr, va;
    std::vector<int> ytr, yva;
    for (std::size_t i = 0; i < folds.size(); ++i) {
      if (folds[i] == f) {
        va.push_back(static_cast<Eigen::Index>(i));
        yva.push_back(y[i]);
      } else {
        tr.push_back(static_cast<Eigen::Index>(i));
        ytr.push_back(y[i]);
      }
    }
    std::vector<std::size_t> kept(d);
    std::iota(kept.begin(), kept.end(), 0);
    std::vector<std::size_t> order;
    while (!kept.empty()) {
      auto p = elimination_params(options, derive_seed(options.seed, f * 1000 + kept.size()));
      auto model = fit_forest(take(x, tr, kept), ytr, p);
      report.fold_auc[f][kept.size() - 1] = eval::auc(model.predict_proba(take(x, va, kept)), yva);
      std::size_t w = weakest(model.impurity_importance);
      order.push_back(kept[w]);
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(w));
    }
    report.fold_elimination_orders.push_back(std::move(order));
  }

  report.mean_auc.assign(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    for (int f = 0; f < options.folds; ++f) report.mean_auc[c] += report.fold_auc[f][c];
    report.mean_auc[c] /= options.folds;
  }
  const auto best_it = std::max_element(report.mean_auc.begin(), report.mean_auc.end());
  const double best = *best_it;
  double tolerance = options.tolerance;
  if (options.one_standard_error && options.folds > 1) {
    const auto b = static_cast<std::size_t>(best_it - report.mean_auc.begin());
    double ss = 0;
    for (const auto& fa : report.fold_auc) ss += (fa[b] - best) * (fa[b] - best);
    const double se = std::sqrt(ss / (options.folds - 1)) / std::sqrt(static_cast<double>(options.folds));
    tolerance = std::max(tolerance, se);
  }
  report.tolerance = tolerance;
  std::size_t count = d;
  for (std::size_t c = 0; c < d; ++c) {
    if (report.mean_auc[c] >= best - tolerance) {
      count = c + 1;
      break;
    }
  }

  std::vector<Eigen::Index> all(y.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> kept(d);
  std::iota(kept.begin(), kept.end(), 0);
  while (!kept.empty()) {
    if (kept.size() == count) {
      report.selected = kept;
    }
    auto p = elimination_params(options, derive_seed(options.seed, 999999 + kept.size()));
    auto model = fit_forest(take(x, all, kept), y, p);
    std::size_t w = weakest(model.impurity_importance);
    report.elimination_order.push_back(kept[w]);
    kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(w));
  }
  std::sort(report.selected.begin(), report.selected.end());
  return report;
}

}  // namespace lendtext::baselines
