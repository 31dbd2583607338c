#include "lendtext/core/preprocess.hpp"

#include <algorithm>
#include <limits>

#include "lendtext/core/error.hpp"

namespace lendtext {

double ScalerParams::scale(std::size_t feature, double x) const {
  double lo = min[feature];
  double hi = max[feature];
  if (!(hi > lo)) return 0.0;
  return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
}

std::vector<double> ScalerParams::apply(std::span<const double> x) const {
  if (x.size() != dim()) throw ValidationError("scaler: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale(i, x[i]);
  return out;
}

nlohmann::json ScalerParams::to_json() const {
  return {{"format", "lendtext.scaler"}, {"version", 1}, {"min", min}, {"max", max}};
}

ScalerParams ScalerParams::from_json(const nlohmann::json& j) {
  ScalerParams p;
  p.min = j.at("min").get<std::vector<double>>();
  p.max = j.at("max").get<std::vector<double>>();
  return p;
}

ScalerParams fit_scaler(const Dataset& dataset, std::span<const std::size_t> idx) {
  if (idx.empty()) throw ValidationError("fit_scaler: empty training index list");
  std::size_t d = dataset.schema.continuous_names.size();
  ScalerParams p;
  p.min.assign(d, std::numeric_limits<double>::infinity());
  p.max.assign(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i : idx) {
    const auto& x = dataset.records.at(i).continuous;
    for (std::size_t f = 0; f < d; ++f) {
      p.min[f] = std::min(p.min[f], x[f]);
      p.max[f] = std::max(p.max[f], x[f]);
    }
  }
  return p;
}

std::vector<double> apply_scaler(const ScalerParams& params, std::span<const double> x) {
  return params.apply(x);
}

CategoryCodec::CategoryCodec(std::vector<std::vector<std::string>> levels)
    : levels_(std::move(levels)), index_(levels_.size()) {
  for (std::size_t f = 0; f < levels_.size(); ++f) {
    for (std::size_t i = 0; i < levels_[f].size(); ++i) {
      index_[f].emplace(levels_[f][i], static_cast<int>(i + 1));
    }
  }
}

int CategoryCodec::encode(std::size_t feature, const std::string& token) const {
  const auto& m = index_.at(feature);
  auto it = m.find(token);
  return it == m.end() ? kUnknown : it->second;
}

nlohmann::json CategoryCodec::to_json() const {
  return {{"format", "lendtext.codec"}, {"version", 1}, {"levels", levels_}};
}

CategoryCodec CategoryCodec::from_json(const nlohmann::json& j) {
  return CategoryCodec(j.at("levels").get<std::vector<std::vector<std::string>>>());
}

CategoryCodec fit_codec(const Dataset& dataset, std::span<const std::size_t> idx) {
  if (idx.empty()) throw ValidationError("fit_codec: empty training index list");
  std::size_t d = dataset.schema.categorical_names.size();
  std::vector<std::vector<std::string>> levels(d);
  std::vector<std::unordered_map<std::string, int>> seen(d);
  for (std::size_t i : idx) {
    const auto& cats = dataset.records.at(i).categorical;
    for (std::size_t f = 0; f < d; ++f) {
      if (seen[f].emplace(cats[f], 0).second) levels[f].push_back(cats[f]);
    }
  }
  return CategoryCodec(std::move(levels));
}

}  // namespace lendtext
