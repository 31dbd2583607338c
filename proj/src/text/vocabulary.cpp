#include "lendtext/text/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "lendtext/core/error.hpp"

namespace lendtext::text {

int Vocabulary::find(const std::string& term) const {
  auto it = index.find(term);
  return it == index.end() ? -1 : it->second;
}

nlohmann::json Vocabulary::to_json() const {
  return {{"format", "lendtext.vocabulary"}, {"version", 1}, {"terms", terms}, {"df", df}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  v.terms = j.at("terms").get<std::vector<std::string>>();
  v.df = j.at("df").get<std::vector<double>>();
  for (std::size_t i = 0; i < v.terms.size(); ++i) v.index[v.terms[i]] = static_cast<int>(i);
  return v;
}

Vocabulary build_vocabulary(const std::vector<Document>& docs, double min_df, double max_df,
                            const StopwordSet& stopwords) {
  if (docs.empty()) throw ValidationError("build_vocabulary: no documents");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : docs) {
    std::vector<std::string> distinct(doc.begin(), doc.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (auto& t : distinct) ++counts[t];
  }
  const double n = static_cast<double>(docs.size());
  std::vector<std::pair<std::string, double>> kept;
  for (const auto& [term, c] : counts) {
    if (stopwords.count(term)) continue;
    double df = static_cast<double>(c) / n;
    if (df >= min_df && df <= max_df) kept.emplace_back(term, df);
  }
  if (kept.empty()) {
    throw ValidationError("build_vocabulary: no term has document frequency in [" +
                          std::to_string(min_df) + ", " + std::to_string(max_df) +
                          "]; widen min_df/max_df");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (auto& [term, df] : kept) {
    v.index[term] = static_cast<int>(v.terms.size());
    v.terms.push_back(term);
    v.df.push_back(df);
  }
  return v;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stopword list " + path.string());
  StopwordSet out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.insert(line);
  }
  return out;
}

void write_stopwords(const std::vector<std::string>& words, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& w : words) out << w << '\n';
}

}  // namespace lendtext::text
