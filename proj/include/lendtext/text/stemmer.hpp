#pragma once

#include <string>
#include <string_view>

namespace lendtext::text {

// Suffix-stripping stemmer sufficient for the synthetic English vocabulary.
// Unknown suffixes leave the word unchanged.
std::string stem(std::string_view word);

}  // namespace lendtext::text
