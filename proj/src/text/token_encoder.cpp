#include "lendtext/text/token_encoder.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "lendtext/core/error.hpp"

namespace lendtext::text {

std::size_t TokenSequence::length() const {
  return static_cast<std::size_t>(std::accumulate(mask.begin(), mask.end(), 0));
}

TokenVocabulary::TokenVocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = static_cast<int>(i);
}

TokenVocabulary TokenVocabulary::fit(const std::vector<Document>& docs, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : docs)
    for (const auto& t : d) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens = {"[PAD]", "[UNK]", "[CLS]", "[MASK]"};
  for (auto& [t, c] : items)
    if (c >= min_count) tokens.push_back(t);
  return TokenVocabulary(std::move(tokens));
}

int TokenVocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() || it->second < kFirstWordId ? kUnk : it->second;
}

nlohmann::json TokenVocabulary::to_json() const {
  return {{"format", "lendtext.token_vocabulary"}, {"version", 1}, {"tokens", tokens_}};
}

TokenVocabulary TokenVocabulary::from_json(const nlohmann::json& j) {
  return TokenVocabulary(j.at("tokens").get<std::vector<std::string>>());
}

TokenSequence encode_for_transformer(const Document& doc, const TokenVocabulary& vocab,
                                     std::size_t max_length) {
  if (max_length < 1) throw ValidationError("encode_for_transformer: max_length must be >= 1");
  TokenSequence seq;
  seq.ids.assign(max_length, kPad);
  seq.mask.assign(max_length, 0);
  seq.ids[0] = kCls;
  seq.mask[0] = 1;
  std::size_t n = std::min(doc.size(), max_length - 1);
  for (std::size_t i = 0; i < n; ++i) {
    seq.ids[i + 1] = vocab.id(doc[i]);
    seq.mask[i + 1] = 1;
  }
  return seq;
}

}  // namespace lendtext::text
