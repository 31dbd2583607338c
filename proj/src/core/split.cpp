#include "lendtext/core/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "lendtext/core/error.hpp"
#include "lendtext/core/rng.hpp"

namespace lendtext {

std::string to_string(SplitName s) {
  switch (s) {
    case SplitName::Train: return "train";
    case SplitName::Holdout: return "holdout";
    case SplitName::OotEarly: return "oot_early";
    case SplitName::OotLate: return "oot_late";
  }
  return "?";
}

const std::vector<std::size_t>& DataSplits::get(SplitName s) const {
  switch (s) {
    case SplitName::Train: return train;
    case SplitName::Holdout: return holdout;
    case SplitName::OotEarly: return oot_early;
    case SplitName::OotLate: return oot_late;
  }
  return train;
}

nlohmann::json DataSplits::to_json() const {
  return {{"format", "lendtext.splits"}, {"version", 1},       {"train", train},
          {"holdout", holdout},          {"oot_early", oot_early}, {"oot_late", oot_late}};
}

DataSplits DataSplits::from_json(const nlohmann::json& j) {
  DataSplits s;
  s.train = j.at("train").get<std::vector<std::size_t>>();
  s.holdout = j.at("holdout").get<std::vector<std::size_t>>();
  s.oot_early = j.at("oot_early").get<std::vector<std::size_t>>();
  s.oot_late = j.at("oot_late").get<std::vector<std::size_t>>();
  return s;
}

DataSplits split_dataset(const Dataset& dataset, double holdout_ratio, std::uint64_t seed) {
  if (!(holdout_ratio >= 0.0 && holdout_ratio < 1.0)) {
    throw ValidationError("holdout ratio must lie in [0, 1)");
  }
  std::set<int> cohorts;
  for (const auto& r : dataset.records) cohorts.insert(r.cohort);
  if (cohorts.size() < 3) {
    throw ValidationError("split_dataset: need at least 3 distinct cohorts, found " +
                          std::to_string(cohorts.size()));
  }
  int first = *cohorts.begin();
  int last = *cohorts.rbegin();

  DataSplits splits;
  // stratum key: (segment, label)
  std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto& r = dataset.records[i];
    if (r.cohort == first) {
      splits.oot_early.push_back(i);
    } else if (r.cohort == last) {
      splits.oot_late.push_back(i);
    } else {
      strata[{static_cast<int>(r.segment), r.label}].push_back(i);
    }
  }
  Rng rng(derive_seed(seed, "split"));
  for (auto& [key, members] : strata) {
    shuffle_in_place(members, rng);
    auto n_hold = static_cast<std::size_t>(std::llround(holdout_ratio * members.size()));
    splits.holdout.insert(splits.holdout.end(), members.begin(), members.begin() + n_hold);
    splits.train.insert(splits.train.end(), members.begin() + n_hold, members.end());
  }
  std::sort(splits.train.begin(), splits.train.end());
  std::sort(splits.holdout.begin(), splits.holdout.end());
  return splits;
}

}  // namespace lendtext
