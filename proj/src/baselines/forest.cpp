#include "lendtext/baselines/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

#include "lendtext/core/error.hpp"
#include "lendtext/core/rng.hpp"
#include "lendtext/eval/metrics.hpp"

namespace lendtext::baselines {

double DecisionTree::predict(const double* row, Eigen::Index stride) const {
  int node = 0;
  while (nodes[node].feature >= 0) {
    const auto& n = nodes[node];
    node = row[n.feature * stride] <= n.threshold ? n.left : n.right;
  }
  return nodes[node].probability;
}

std::vector<double> ForestModel::predict_proba(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != n_features) {
    throw ValidationError("forest: column count mismatch");
  }
  std::vector<double> out(static_cast<std::size_t>(x.rows()), 0.0);
  const Eigen::Index stride = x.rows();
  for (const auto& t : trees) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] += t.predict(x.data() + i, stride);
  }
  for (double& v : out) v /= static_cast<double>(trees.size());
  return out;
}

nlohmann::json ForestModel::to_json() const {
  nlohmann::json jt = nlohmann::json::array();
  for (const auto& t : trees) {
    std::vector<int> feature, left, right;
    std::vector<double> threshold, prob;
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      left.push_back(n.left);
      right.push_back(n.right);
      threshold.push_back(n.threshold);
      prob.push_back(n.probability);
    }
    jt.push_back({{"depth", t.depth}, {"feature", feature}, {"threshold", threshold},
                  {"left", left}, {"right", right}, {"probability", prob}});
  }
  return {{"format", "lendtext.forest"},
          {"version", 1},
          {"n_features", n_features},
          {"params",
           {{"n_trees", params.n_trees},
            {"max_depth", params.max_depth},
            {"max_features", params.max_features},
            {"min_samples_leaf", params.min_samples_leaf},
            {"n_bins", params.n_bins},
            {"seed", params.seed}}},
          {"impurity_importance", impurity_importance},
          {"trees", jt}};
}

ForestModel ForestModel::from_json(const nlohmann::json& j) {
  ForestModel m;
  m.n_features = j.at("n_features").get<std::size_t>();
  const auto& p = j.at("params");
  m.params.n_trees = p.at("n_trees");
  m.params.max_depth = p.at("max_depth");
  m.params.max_features = p.at("max_features");
  m.params.min_samples_leaf = p.at("min_samples_leaf");
  m.params.n_bins = p.at("n_bins");
  m.params.seed = p.at("seed");
  m.impurity_importance = j.at("impurity_importance").get<std::vector<double>>();
  for (const auto& jt : j.at("trees")) {
    DecisionTree t;
    t.depth = jt.at("depth");
    auto feature = jt.at("feature").get<std::vector<int>>();
    auto threshold = jt.at("threshold").get<std::vector<double>>();
    auto left = jt.at("left").get<std::vector<int>>();
    auto right = jt.at("right").get<std::vector<int>>();
    auto prob = jt.at("probability").get<std::vector<double>>();
    for (std::size_t k = 0; k < feature.size(); ++k) {
      t.nodes.push_back({feature[k], threshold[k], left[k], right[k], prob[k]});
    }
    m.trees.push_back(std::move(t));
  }
  return m;
}

namespace {

// Per-feature quantile cut points and the binned training matrix.
struct BinnedData {
  std::vector<std::vector<double>> cuts;         // ascending thresholds per feature
  std::vector<std::vector<std::uint16_t>> bins;  // [feature][row]; bin b <=> x <= cuts[b]
};

BinnedData bin_features(const Eigen::MatrixXd& x, int n_bins) {
  BinnedData bd;
  const Eigen::Index n = x.rows();
  bd.cuts.resize(x.cols());
  bd.bins.resize(x.cols());
  std::vector<double> col(n);
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    for (Eigen::Index i = 0; i < n; ++i) col[i] = x(i, f);
    std::vector<double> sorted = col;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> uniq = sorted;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    auto& cuts = bd.cuts[f];
    if (uniq.size() <= static_cast<std::size_t>(n_bins)) {
      for (std::size_t k = 0; k + 1 < uniq.size(); ++k) cuts.push_back(0.5 * (uniq[k] + uniq[k + 1]));
    } else {
      for (int q = 1; q < n_bins; ++q) {
        std::size_t pos = static_cast<std::size_t>(q) * sorted.size() / n_bins;
        double lo = sorted[pos - 1], hi = sorted[pos];
        double c = lo < hi ? 0.5 * (lo + hi) : lo;
        if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
      }
    }
    auto& b = bd.bins[f];
    b.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      b[i] = static_cast<std::uint16_t>(std::lower_bound(cuts.begin(), cuts.end(), col[i]) -
                                        cuts.begin());
    }
  }
  return bd;
}

struct TreeBuilder {
  const BinnedData& data;
  std::span<const int> y;
  const ForestParams& params;
  int max_features;
  Rng rng;
  DecisionTree tree;
  std::vector<double>& importance;
  double total_weight = 0;

  // rows holds bootstrap draws (with repetition)
  int build(std::vector<std::size_t>& rows, int depth) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.depth = std::max(tree.depth, depth);
    double pos = 0;
    for (auto r : rows) pos += y[r];
    const double n = static_cast<double>(rows.size());
    tree.nodes[node_id].probability = pos / n;

    if (depth >= params.max_depth || pos == 0 || pos == n ||
        rows.size() < 2 * static_cast<std::size_t>(params.min_samples_leaf)) {
      return node_id;
    }

    const std::size_t d = data.bins.size();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    // partial Fisher-Yates: first max_features entries are the sample
    for (int k = 0; k < max_features && k < static_cast<int>(d); ++k) {
      std::size_t j = k + uniform_index(rng, d - k);
      std::swap(features[k], features[j]);
    }
    features.resize(std::min<std::size_t>(max_features, d));

    const double parent_gini = 1.0 - (pos / n) * (pos / n) - ((n - pos) / n) * ((n - pos) / n);
    double best_gain = 1e-12;
    int best_feature = -1;
    int best_cut = -1;
    std::vector<double> cnt, cnt_pos;
    for (std::size_t f : features) {
      const auto& cuts = data.cuts[f];
      if (cuts.empty()) continue;
      const std::size_t nb = cuts.size() + 1;
      cnt.assign(nb, 0.0);
      cnt_pos.assign(nb, 0.0);
      const auto& b = data.bins[f];
      for (auto r : rows) {
        cnt[b[r]] += 1;
        cnt_pos[b[r]] += y[r];
      }
      double left_n = 0, left_pos = 0;
      for (std::size_t c = 0; c + 1 < nb; ++c) {
        left_n += cnt[c];
        left_pos += cnt_pos[c];
        double right_n = n - left_n;
        if (left_n < params.min_samples_leaf || right_n < params.min_samples_leaf) continue;
        double right_pos = pos - left_pos;
        double pl = left_pos / left_n, pr = right_pos / right_n;
        double gini_l = 2 * pl * (1 - pl), gini_r = 2 * pr * (1 - pr);
        double gain = parent_gini - (left_n / n) * gini_l - (right_n / n) * gini_r;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_cut = static_cast<int>(c);
        }
      }
    }
    if (best_feature < 0) return node_id;

    importance[best_feature] += best_gain * n / total_weight;
    std::vector<std::size_t> left_rows, right_rows;
    const auto& b = data.bins[best_feature];
    for (auto r : rows) (b[r] <= best_cut ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    tree.nodes[node_id].feature = best_feature;
    tree.nodes[node_id].threshold = data.cuts[best_feature][best_cut];
    int l = build(left_rows, depth + 1);
    int r = build(right_rows, depth + 1);
    tree.nodes[node_id].left = l;
    tree.nodes[node_id].right = r;
    return node_id;
  }
};

int resolve_max_features(int requested, std::size_t d) {
  if (requested <= 0) {
    return std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(d)))));
  }
  return std::min<int>(requested, static_cast<int>(d));
}

}  // namespace

ForestModel fit_forest(const Eigen::MatrixXd& x, std::span<const int> y, const ForestParams& params) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw ValidationError("forest: design matrix rows differ from label count");
  }
  if (!x.allFinite()) throw ValidationError("forest: design matrix contains non-finite values");
  check_binary_labels(y);
  if (params.n_trees < 1 || params.max_depth < 1) {
    throw ValidationError("forest: n_trees and max_depth must be positive");
  }
  const std::size_t d = static_cast<std::size_t>(x.cols());
  const std::size_t n = y.size();
  BinnedData data = bin_features(x, std::clamp(params.n_bins, 2, 65535));
  const int mtry = resolve_max_features(params.max_features, d);

  ForestModel model;
  model.params = params;
  model.n_features = d;
  model.trees.resize(params.n_trees);
  std::vector<std::vector<double>> importance(params.n_trees, std::vector<double>(d, 0.0));

  auto grow = [&](int t) {
    Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = uniform_index(rng, n);
    TreeBuilder builder{data, y, params, mtry, std::move(rng), {}, importance[t],
                        static_cast<double>(n)};
    builder.build(rows, 0);
    model.trees[t] = std::move(builder.tree);
  };
  const int threads = std::max(1, std::min(params.threads, params.n_trees));
  if (threads == 1) {
    for (int t = 0; t < params.n_trees; ++t) grow(t);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (int t = w; t < params.n_trees; t += threads) grow(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Reduce in tree order so the result does not depend on scheduling.
  model.impurity_importance.assign(d, 0.0);
  for (const auto& imp : importance)
    for (std::size_t f = 0; f < d; ++f) model.impurity_importance[f] += imp[f];
  double total = std::accumulate(model.impurity_importance.begin(),
                                 model.impurity_importance.end(), 0.0);
  if (total > 0)
    for (double& v : model.impurity_importance) v /= total;
  return model;
}

std::pair<ForestModel, CvSearchReport> train_random_forest(const Eigen::MatrixXd& x,
                                                           std::span<const int> y,
                                                           const ForestSearch& search) {
  check_binary_labels(y);
  const std::size_t d = static_cast<std::size_t>(x.cols());
  // Expand the grid; max_features values resolved to absolute counts.
  std::set<int> mf_set;
  for (int v : search.max_features) mf_set.insert(resolve_max_features(v, d));
  for (double frac : search.max_features_fraction) {
    mf_set.insert(std::max(1, static_cast<int>(std::lround(frac * static_cast<double>(d)))));
  }
  std::vector<std::pair<int, int>> grid;  // (max_depth, max_features)
  for (int depth : search.max_depth)
    for (int mf : mf_set) grid.emplace_back(depth, std::min<int>(mf, static_cast<int>(d)));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) throw ValidationError("forest search grid is empty");

  Rng rng(derive_seed(search.seed, "forest-search"));
  shuffle_in_place(grid, rng);
  grid.resize(std::min<std::size_t>(grid.size(), std::max(1, search.n_candidates)));
  std::sort(grid.begin(), grid.end());

  CvSearchReport report;
  report.model = "random_forest";
  report.n_folds = search.folds;
  const auto folds = stratified_folds(y, search.folds, search.seed);

  std::vector<std::vector<Eigen::Index>> train_rows(search.folds), val_rows(search.folds);
  for (std::size_t i = 0; i < folds.size(); ++i) {
    for (int f = 0; f < search.folds; ++f) {
      (folds[i] == f ? val_rows[f] : train_rows[f]).push_back(static_cast<Eigen::Index>(i));
    }
  }

  for (std::size_t c = 0; c < grid.size(); ++c) {
    CvCandidate cand;
    cand.params = {{"max_depth", grid[c].first}, {"max_features", grid[c].second}};
    for (int f = 0; f < search.folds; ++f) {
      Eigen::MatrixXd xtr(train_rows[f].size(), x.cols()), xva(val_rows[f].size(), x.cols());
      std::vector<int> ytr, yva;
      for (std::size_t r = 0; r < train_rows[f].size(); ++r) {
        xtr.row(r) = x.row(train_rows[f][r]);
        ytr.push_back(y[train_rows[f][r]]);
      }
      for (std::size_t r = 0; r < val_rows[f].size(); ++r) {
        xva.row(r) = x.row(val_rows[f][r]);
        yva.push_back(y[val_rows[f][r]]);
      }
      ForestParams p;
      p.n_trees = search.n_trees;
      p.max_depth = grid[c].first;
      p.max_features = grid[c].second;
      p.threads = search.threads;
      p.seed = derive_seed(search.seed, static_cast<std::uint64_t>(c * 1000 + f));
      auto m = fit_forest(xtr, ytr, p);
      cand.fold_auc.push_back(eval::auc(m.predict_proba(xva), yva));
    }
    summarize(cand);
    report.candidates.push_back(std::move(cand));
  }
  // Grid is sorted by (depth, features): strict '>' keeps the smaller model on ties.
  double best = -1;
  for (std::size_t c = 0; c < report.candidates.size(); ++c) {
    if (report.candidates[c].mean_auc > best) {
      best = report.candidates[c].mean_auc;
      report.chosen = c;
    }
  }
  ForestParams p;
  p.n_trees = search.n_trees;
  p.max_depth = grid[report.chosen].first;
  p.max_features = grid[report.chosen].second;
  p.threads = search.threads;
  p.seed = derive_seed(search.seed, "forest-final");
  return {fit_forest(x, y, p), report};
}

}  // namespace lendtext::baselines
