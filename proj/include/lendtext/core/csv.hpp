#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lendtext::csv {

using Row = std::vector<std::string>;

// Parses RFC 4180 content: quoted fields may contain commas, quotes ("") and
// newlines. Throws ValidationError on an unterminated quote.
std::vector<Row> parse(std::string_view content);

std::string escape(std::string_view field);
std::string format_row(const Row& row);

}  // namespace lendtext::csv
