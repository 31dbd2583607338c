#include "lendtext/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "lendtext/core/csv.hpp"
#include "lendtext/core/error.hpp"
#include "lendtext/eval/metrics.hpp"

namespace lendtext::eval {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool both_classes(std::span<const int> labels) {
  bool pos = false, neg = false;
  for (int y : labels) (y ? pos : neg) = true;
  return pos && neg;
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

void PredictionSet::validate() const {
  const std::size_t n = ids.size();
  if (scores.size() != n || labels.size() != n || word_counts.size() != n || segments.size() != n) {
    throw ValidationError("prediction set " + model + "/" + subset + "/" + split + ": misaligned fields");
  }
  for (double s : scores) {
    if (!std::isfinite(s) || s < 0 || s > 1) {
      throw ValidationError("prediction set " + model + "/" + subset + "/" + split + ": score outside [0,1]");
    }
  }
}

PredictionSet PredictionSet::filter_segment(const std::string& segment) const {
  if (segment == "all") return *this;
  PredictionSet out{model, subset, split, {}, {}, {}, {}, {}};
  for (std::size_t i = 0; i < size(); ++i) {
    if (segments[i] != segment) continue;
    out.ids.push_back(ids[i]);
    out.scores.push_back(scores[i]);
    out.labels.push_back(labels[i]);
    out.word_counts.push_back(word_counts[i]);
    out.segments.push_back(segments[i]);
  }
  return out;
}

std::string PredictionSet::to_csv() const {
  std::string out = csv::format_row({"id", "segment", "label", "word_count", "score"});
  for (std::size_t i = 0; i < size(); ++i) {
    out += csv::format_row(
        {ids[i], segments[i], std::to_string(labels[i]), std::to_string(word_counts[i]), fmt(scores[i])});
  }
  return out;
}

PredictionSet PredictionSet::from_csv(const std::string& text, std::string model, std::string subset,
                                      std::string split) {
  auto rows = csv::parse(text);
  if (rows.empty() || rows[0] != csv::Row{"id", "segment", "label", "word_count", "score"}) {
    throw SchemaError("prediction file: unexpected header");
  }
  PredictionSet p{std::move(model), std::move(subset), std::move(split), {}, {}, {}, {}, {}};
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 5) throw SchemaError("prediction file: row " + std::to_string(r) + " has wrong width");
    p.ids.push_back(row[0]);
    p.segments.push_back(row[1]);
    p.labels.push_back(std::stoi(row[2]));
    p.word_counts.push_back(std::stoi(row[3]));
    p.scores.push_back(std::stod(row[4]));
  }
  p.validate();
  return p;
}

nlohmann::json MetricReport::to_json() const {
  return {{"auc", opt_json(auc)}, {"weighted_brier", opt_json(weighted_brier)}, {"n", n},
          {"default_rate", default_rate}};
}

MetricReport compute_metrics(std::span<const double> scores, std::span<const int> labels) {
  MetricReport m;
  m.n = labels.size();
  double pos = 0;
  for (int y : labels) pos += y;
  m.default_rate = m.n ? pos / static_cast<double>(m.n) : 0.0;
  if (both_classes(labels)) {
    m.auc = auc(scores, labels);
    m.weighted_brier = weighted_brier(scores, labels);
  }
  return m;
}

nlohmann::json WordCountCurve::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    pts.push_back({{"threshold", thresholds[i]}, {"auc", opt_json(auc[i])}, {"count", counts[i]}});
  }
  return pts;
}

std::string WordCountCurve::to_csv() const {
  std::string out = csv::format_row({"threshold", "auc", "count"});
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    out += csv::format_row({fmt(thresholds[i]), auc[i] ? fmt(*auc[i]) : "", std::to_string(counts[i])});
  }
  return out;
}

std::vector<double> default_wordcount_thresholds(std::span<const int> train_word_counts) {
  std::vector<double> v(train_word_counts.begin(), train_word_counts.end());
  std::sort(v.begin(), v.end());
  std::set<double, std::greater<>> out = {0.0};
  if (!v.empty()) {
    for (int q = 1; q <= 9; ++q) {
      // linear interpolation between order statistics
      double pos = q / 10.0 * static_cast<double>(v.size() - 1);
      std::size_t lo = static_cast<std::size_t>(std::floor(pos));
      std::size_t hi = std::min(lo + 1, v.size() - 1);
      out.insert(v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]));
    }
  }
  return {out.begin(), out.end()};
}

WordCountCurve auc_by_wordcount(const PredictionSet& preds, std::span<const double> thresholds) {
  preds.validate();
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] < thresholds[i - 1])) throw ValidationError("word-count thresholds must be descending");
  }
  WordCountCurve curve;
  for (double t : thresholds) {
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds.word_counts[i] >= t) {
        s.push_back(preds.scores[i]);
        y.push_back(preds.labels[i]);
      }
    }
    curve.thresholds.push_back(t);
    curve.counts.push_back(s.size());
    curve.auc.push_back(both_classes(y) ? std::optional<double>(auc(s, y)) : std::nullopt);
  }
  return curve;
}

nlohmann::json CorrelationMatrix::to_json() const {
  return {{"segment", segment}, {"labels", labels}, {"values", values}};
}

CorrelationMatrix correlation_matrix(const std::vector<PredictionSet>& sets, const std::string& segment) {
  CorrelationMatrix m;
  m.segment = segment;
  std::vector<PredictionSet> filtered;
  for (const auto& s : sets) {
    filtered.push_back(s.filter_segment(segment));
    m.labels.push_back(s.model + "_" + s.subset);
    if (filtered.back().ids != filtered.front().ids) {
      throw ValidationError("correlation_matrix: prediction sets are not aligned");
    }
  }
  const std::size_t k = filtered.size();
  m.values.assign(k, std::vector<double>(k, 1.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      double r = spearman_rank_corr(filtered[i].scores, filtered[j].scores);
      m.values[i][j] = m.values[j][i] = r;
    }
  }
  return m;
}

const ReportCell* ReportGrid::find(const std::string& model, const std::string& subset, const std::string& split,
                                   const std::string& segment) const {
  for (const auto& c : cells) {
    if (c.model == model && c.subset == subset && c.split == split && c.segment == segment) return &c;
  }
  return nullptr;
}

nlohmann::json ReportGrid::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : cells) {
    out.push_back({{"model", c.model},
                   {"subset", c.subset},
                   {"split", c.split},
                   {"segment", c.segment},
                   {"metrics", c.metrics.to_json()},
                   {"best_auc", c.best_auc},
                   {"best_brier", c.best_brier}});
  }
  return out;
}

std::string ReportGrid::to_csv() const {
  std::string out = csv::format_row(
      {"model", "subset", "split", "segment", "n", "default_rate", "auc", "weighted_brier", "best_auc", "best_brier"});
  for (const auto& c : cells) {
    out += csv::format_row({c.model, c.subset, c.split, c.segment, std::to_string(c.metrics.n),
                            fmt(c.metrics.default_rate), c.metrics.auc ? fmt(*c.metrics.auc) : "",
                            c.metrics.weighted_brier ? fmt(*c.metrics.weighted_brier) : "",
                            c.best_auc ? "1" : "0", c.best_brier ? "1" : "0"});
  }
  return out;
}

ReportGrid segment_report(const std::vector<PredictionSet>& sets) {
  ReportGrid grid;
  for (const auto& s : sets) {
    s.validate();
    std::vector<std::string> segs = {"all"};
    std::set<std::string> tags(s.segments.begin(), s.segments.end());
    segs.insert(segs.end(), tags.begin(), tags.end());
    for (const auto& seg : segs) {
      auto f = s.filter_segment(seg);
      grid.cells.push_back({s.model, s.subset, s.split, seg, compute_metrics(f.scores, f.labels)});
    }
  }
  // Best model per (subset, split, segment); ties keep the first cell.
  std::map<std::tuple<std::string, std::string, std::string>, std::pair<int, int>> best;
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const auto& c = grid.cells[i];
    auto key = std::make_tuple(c.subset, c.split, c.segment);
    auto it = best.find(key);
    if (it == best.end()) it = best.emplace(key, std::make_pair(-1, -1)).first;
    auto& [ba, bb] = it->second;
    if (c.metrics.auc && (ba < 0 || *c.metrics.auc > *grid.cells[ba].metrics.auc)) ba = static_cast<int>(i);
    if (c.metrics.weighted_brier &&
        (bb < 0 || *c.metrics.weighted_brier < *grid.cells[bb].metrics.weighted_brier)) {
      bb = static_cast<int>(i);
    }
  }
  for (const auto& [key, v] : best) {
    if (v.first >= 0) grid.cells[v.first].best_auc = true;
    if (v.second >= 0) grid.cells[v.second].best_brier = true;
  }
  return grid;
}

}  // namespace lendtext::eval
