#include "lendtext/text/stemmer.hpp"

#include <array>

namespace lendtext::text {

std::string stem(std::string_view word) {
  struct Rule {
    std::string_view suffix;
    std::string_view replacement;
  };
  // Longest suffixes first; a rule fires only if at least 3 characters remain.
  static constexpr std::array<Rule, 14> kRules = {{
      {"ational", "ate"},
      {"ations", "ate"},
      {"ation", "ate"},
      {"ltural", "lture"},
      {"nesses", "ness"},
      {"ments", "ment"},
      {"ities", "ity"},
      {"ing", ""},
      {"ies", "y"},
      {"ers", "er"},
      {"ses", "s"},
      {"ed", ""},
      {"es", "e"},
      {"s", ""},
  }};
  std::string w(word);
  for (const auto& r : kRules) {
    if (w.size() >= r.suffix.size() + 3 &&
        std::string_view(w).substr(w.size() - r.suffix.size()) == r.suffix) {
      if (r.suffix == "s" && w.size() >= 2 && (w[w.size() - 2] == 's' || w[w.size() - 2] == 'u')) {
        return w;
      }
      w.resize(w.size() - r.suffix.size());
      w += r.replacement;
      return w;
    }
  }
  return w;
}

}  // namespace lendtext::text
