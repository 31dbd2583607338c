#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "lendtext/core/dataset.hpp"

namespace lendtext {

// Min/max statistics per continuous feature, fit on training rows only.
struct ScalerParams {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t dim() const { return min.size(); }
  // (x - min) / (max - min) clipped to [0, 1]; constant features map to 0.
  double scale(std::size_t feature, double x) const;
  std::vector<double> apply(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static ScalerParams from_json(const nlohmann::json& j);
};

ScalerParams fit_scaler(const Dataset& dataset, std::span<const std::size_t> idx);
std::vector<double> apply_scaler(const ScalerParams& params, std::span<const double> x);

// Label encoding per categorical feature. Index 0 is reserved for tokens that
// were not seen during fitting; training tokens get 1..n by first occurrence.
class CategoryCodec {
 public:
  static constexpr int kUnknown = 0;

  CategoryCodec() = default;
  explicit CategoryCodec(std::vector<std::vector<std::string>> levels);

  std::size_t n_features() const { return levels_.size(); }
  // Number of training levels n for a feature (indices span [0, n]).
  std::size_t cardinality(std::size_t feature) const { return levels_[feature].size(); }
  int encode(std::size_t feature, const std::string& token) const;
  const std::vector<std::string>& levels(std::size_t feature) const { return levels_[feature]; }

  nlohmann::json to_json() const;
  static CategoryCodec from_json(const nlohmann::json& j);

 private:
  std::vector<std::vector<std::string>> levels_;
  std::vector<std::unordered_map<std::string, int>> index_;
};

CategoryCodec fit_codec(const Dataset& dataset, std::span<const std::size_t> idx);

}  // namespace lendtext
