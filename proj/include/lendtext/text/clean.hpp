#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lendtext::text {

// Lowercases, separates punctuation into standalone tokens, collapses
// whitespace runs and trims. "Buy, now." -> "buy , now ."
std::string clean_text(std::string_view raw);

// Splits cleaned text on single spaces.
std::vector<std::string> tokenize(std::string_view cleaned);

bool is_punctuation(std::string_view token);

// Word tokens only (no punctuation); the unit used by the LSA pipeline.
std::vector<std::string> word_tokens(std::string_view raw);

}  // namespace lendtext::text
