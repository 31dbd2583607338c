#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "lendtext/text/vocabulary.hpp"

namespace lendtext::text {

inline constexpr int kPad = 0;
inline constexpr int kUnk = 1;
inline constexpr int kCls = 2;
inline constexpr int kMask = 3;
inline constexpr int kFirstWordId = 4;

struct TokenSequence {
  std::vector<int> ids;   // length L, ids[0] == kCls
  std::vector<int> mask;  // 1 for real tokens (CLS included), 0 for PAD

  std::size_t length() const;  // number of unmasked positions
};

// Whole-word vocabulary over cleaned training documents.
class TokenVocabulary {
 public:
  TokenVocabulary() = default;
  static TokenVocabulary fit(const std::vector<Document>& docs, std::size_t min_count = 1);

  int id(const std::string& token) const;
  const std::string& token(int id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }

  nlohmann::json to_json() const;
  static TokenVocabulary from_json(const nlohmann::json& j);

 private:
  explicit TokenVocabulary(std::vector<std::string> tokens);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// [CLS] + ids truncated to L-1 tokens, then PAD to length L.
TokenSequence encode_for_transformer(const Document& doc, const TokenVocabulary& vocab,
                                     std::size_t max_length = 512);

}  // namespace lendtext::text
