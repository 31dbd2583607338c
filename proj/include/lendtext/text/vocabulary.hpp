#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

namespace lendtext::text {

using Document = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;

// Terms retained for the TF-IDF matrix, ordered by (-df, term).
struct Vocabulary {
  std::vector<std::string> terms;
  std::vector<double> df;  // fraction of training documents containing the term
  std::unordered_map<std::string, int> index;

  std::size_t size() const { return terms.size(); }
  int find(const std::string& term) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);
};

// Keeps non-stopword terms whose document frequency lies in [min_df, max_df].
// Throws ValidationError when nothing survives the screen.
Vocabulary build_vocabulary(const std::vector<Document>& docs, double min_df = 0.05,
                            double max_df = 0.10, const StopwordSet& stopwords = {});

// One term per line; blank lines and lines starting with '#' are ignored.
StopwordSet load_stopwords(const std::filesystem::path& path);
void write_stopwords(const std::vector<std::string>& words, const std::filesystem::path& path);

}  // namespace lendtext::text
