#include "lendtext/text/clean.hpp"

#include <cctype>

namespace lendtext::text {

std::string clean_text(std::string_view raw) {
  std::string spaced;
  spaced.reserve(raw.size() + raw.size() / 4);
  for (char c : raw) {
    auto uc = static_cast<unsigned char>(c);
    if (std::ispunct(uc) && c != '\'' && c != '-') {
      spaced.push_back(' ');
      spaced.push_back(c);
      spaced.push_back(' ');
    } else if (std::isspace(uc)) {
      spaced.push_back(' ');
    } else {
      spaced.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  std::string out;
  out.reserve(spaced.size());
  bool pending_space = false;
  for (char c : spaced) {
    if (c == ' ') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view cleaned) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < cleaned.size()) {
    std::size_t end = cleaned.find(' ', start);
    if (end == std::string_view::npos) end = cleaned.size();
    if (end > start) tokens.emplace_back(cleaned.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

bool is_punctuation(std::string_view token) {
  for (char c : token) {
    if (!std::ispunct(static_cast<unsigned char>(c))) return false;
  }
  return !token.empty();
}

std::vector<std::string> word_tokens(std::string_view raw) {
  std::vector<std::string> words;
  for (auto& t : tokenize(clean_text(raw))) {
    if (!is_punctuation(t)) words.push_back(std::move(t));
  }
  return words;
}

}  // namespace lendtext::text
