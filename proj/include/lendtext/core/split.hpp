#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "lendtext/core/dataset.hpp"

namespace lendtext {

enum class SplitName { Train, Holdout, OotEarly, OotLate };

std::string to_string(SplitName s);
inline constexpr SplitName kAllSplits[] = {SplitName::Train, SplitName::Holdout,
                                           SplitName::OotEarly, SplitName::OotLate};

struct DataSplits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> holdout;
  std::vector<std::size_t> oot_early;
  std::vector<std::size_t> oot_late;

  const std::vector<std::size_t>& get(SplitName s) const;

  nlohmann::json to_json() const;
  static DataSplits from_json(const nlohmann::json& j);
};

// Earliest cohort -> oot_early, latest -> oot_late; the remaining core rows
// are split into train/holdout stratified by (segment, label).
DataSplits split_dataset(const Dataset& dataset, double holdout_ratio, std::uint64_t seed);

}  // namespace lendtext
