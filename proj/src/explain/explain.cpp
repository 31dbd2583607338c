#include "lendtext/explain/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <unordered_map>

#include <Eigen/Dense>

#include "lendtext/core/csv.hpp"
#include "lendtext/core/error.hpp"
#include "lendtext/core/rng.hpp"
#include "lendtext/eval/metrics.hpp"
#include "lendtext/text/clean.hpp"
#include "lendtext/text/stemmer.hpp"

namespace lendtext::explain {

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

const FeatureImportance* PermutationImportanceReport::find(const std::string& name) const {
  for (const auto& f : features)
    if (f.feature == name) return &f;
  return nullptr;
}

nlohmann::json PermutationImportanceReport::to_json() const {
  nlohmann::json fs = nlohmann::json::array();
  for (const auto& f : features) {
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : f.repeats) reps.push_back(r ? nlohmann::json(*r) : nlohmann::json());
    fs.push_back({{"feature", f.feature},
                  {"mean_drop", f.mean_drop},
                  {"std_drop", f.std_drop},
                  {"repeats", reps},
                  {"flagged", f.flagged}});
  }
  return {{"baseline_auc", baseline_metric}, {"repeats", repeats}, {"seed", seed}, {"features", fs}};
}

std::string PermutationImportanceReport::to_csv() const {
  std::string out = csv::format_row({"feature", "mean_drop", "std_drop", "flagged"});
  for (const auto& f : features) {
    out += csv::format_row({f.feature, fmt(f.mean_drop), fmt(f.std_drop), f.flagged ? "1" : "0"});
  }
  return out;
}

PermutationImportanceReport permutation_importance(const std::vector<std::string>& features,
                                                   const PermutedScorer& scorer, std::span<const int> labels,
                                                   int repeats, std::uint64_t seed) {
  if (repeats < 1) throw ValidationError("permutation_importance: repeats must be >= 1");
  PermutationImportanceReport report;
  report.repeats = repeats;
  report.seed = seed;
  report.baseline_metric = eval::auc(scorer(-1, {}), labels);
  const std::size_t n = labels.size();
  for (std::size_t f = 0; f < features.size(); ++f) {
    FeatureImportance fi;
    fi.feature = features[f];
    std::vector<double> valid;
    for (int r = 0; r < repeats; ++r) {
      Rng rng(derive_seed(derive_seed(seed, features[f]), static_cast<std::uint64_t>(r)));
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      shuffle_in_place(perm, rng);
      try {
        double m = eval::auc(scorer(static_cast<int>(f), perm), labels);
        fi.repeats.push_back(report.baseline_metric - m);
        valid.push_back(report.baseline_metric - m);
      } catch (const ValidationError&) {
        fi.repeats.push_back(std::nullopt);
        fi.flagged = true;
      }
    }
    if (!valid.empty()) {
      fi.mean_drop = std::accumulate(valid.begin(), valid.end(), 0.0) / static_cast<double>(valid.size());
      double ss = 0;
      for (double v : valid) ss += (v - fi.mean_drop) * (v - fi.mean_drop);
      fi.std_drop = std::sqrt(ss / static_cast<double>(valid.size()));
    }
    report.features.push_back(std::move(fi));
  }
  return report;
}

const ShiftEntry* ImportanceShift::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.feature == name) return &e;
  return nullptr;
}

nlohmann::json ImportanceShift::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : entries) {
    out.push_back({{"feature", e.feature}, {"baseline", e.baseline}, {"combined", e.combined}, {"delta", e.delta}});
  }
  return out;
}

ImportanceShift importance_shift(const PermutationImportanceReport& base, const PermutationImportanceReport& combined) {
  ImportanceShift shift;
  for (const auto& f : base.features) {
    const auto* c = combined.find(f.feature);
    if (!c) throw ValidationError("importance_shift: feature '" + f.feature + "' missing from combined report");
    shift.entries.push_back({f.feature, f.mean_drop, c->mean_drop, c->mean_drop - f.mean_drop});
  }
  for (const auto& f : combined.features) {
    if (f.feature != kTextFeature && !base.find(f.feature)) {
      throw ValidationError("importance_shift: feature '" + f.feature + "' missing from baseline report");
    }
  }
  std::stable_sort(shift.entries.begin(), shift.entries.end(),
                   [](const ShiftEntry& a, const ShiftEntry& b) { return a.delta < b.delta; });
  return shift;
}

nlohmann::json UncertainCaseSelection::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : cases) {
    cs.push_back({{"id", c.id},
                  {"structured", c.structured},
                  {"combined", c.combined},
                  {"label", c.label},
                  {"improvement", c.improvement}});
  }
  return {{"band", {lo, hi}}, {"top_n", top_n}, {"cases", cs}};
}

UncertainCaseSelection select_uncertain_improved(std::span<const std::string> ids, std::span<const double> structured,
                                                 std::span<const double> combined, std::span<const int> labels,
                                                 double lo, double hi, std::size_t top_n) {
  if (structured.size() != ids.size() || combined.size() != ids.size() || labels.size() != ids.size()) {
    throw ValidationError("select_uncertain_improved: misaligned inputs");
  }
  UncertainCaseSelection sel;
  sel.lo = lo;
  sel.hi = hi;
  sel.top_n = top_n;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (structured[i] < lo || structured[i] > hi) continue;
    double y = labels[i];
    sel.cases.push_back({ids[i], structured[i], combined[i], labels[i],
                         std::abs(y - structured[i]) - std::abs(y - combined[i])});
  }
  std::sort(sel.cases.begin(), sel.cases.end(), [](const UncertainCase& a, const UncertainCase& b) {
    if (a.improvement != b.improvement) return a.improvement > b.improvement;
    // natural order for decimal ids
    if (a.id.size() != b.id.size()) return a.id.size() < b.id.size();
    return a.id < b.id;
  });
  if (sel.cases.size() > top_n) sel.cases.resize(top_n);
  return sel;
}

double LimeExplanation::weight(const std::string& word) const {
  for (const auto& w : words)
    if (w.word == word) return w.weight;
  return 0.0;
}

nlohmann::json LimeExplanation::to_json() const {
  nlohmann::json ws = nlohmann::json::array();
  for (const auto& w : words) ws.push_back({{"word", w.word}, {"weight", w.weight}});
  return {{"doc_id", doc_id},       {"words", ws},          {"intercept", intercept},
          {"local_r2", local_r2},   {"n_samples", n_samples}, {"kernel_width", kernel_width},
          {"original_score", original_score}};
}

LimeExplanation lime_text(const TextScorer& scorer, const std::string& doc, const LimeOptions& opt) {
  const auto tokens = text::tokenize(text::clean_text(doc));
  std::vector<std::string> words;
  std::unordered_map<std::string, int> word_index;
  std::vector<int> token_word(tokens.size(), -1);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (text::is_punctuation(tokens[t])) continue;
    auto [it, inserted] = word_index.emplace(tokens[t], static_cast<int>(words.size()));
    if (inserted) words.push_back(tokens[t]);
    token_word[t] = it->second;
  }
  if (words.empty()) throw ValidationError("lime_text: document has no words after cleaning");
  if (opt.n_samples < 1 || !(opt.kernel_width > 0)) throw ValidationError("lime_text: invalid options");
  const std::size_t m = words.size();

  // Sample 0 keeps every word; the rest keep each word with probability 1/2.
  Rng rng(opt.seed);
  Eigen::MatrixXd z(opt.n_samples, static_cast<Eigen::Index>(m));
  std::vector<std::string> mask_keys(opt.n_samples);
  for (int s = 0; s < opt.n_samples; ++s) {
    std::string key(m, '1');
    for (std::size_t j = 0; j < m; ++j) {
      bool keep = s == 0 || uniform01(rng) < 0.5;
      z(s, static_cast<Eigen::Index>(j)) = keep ? 1.0 : 0.0;
      key[j] = keep ? '1' : '0';
    }
    mask_keys[s] = std::move(key);
  }
  // Score each distinct mask once.
  std::map<std::string, std::size_t> unique;
  std::vector<std::string> texts;
  for (const auto& key : mask_keys) {
    if (unique.count(key)) continue;
    std::string t;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (token_word[k] >= 0 && key[token_word[k]] == '0') continue;
      if (!t.empty()) t.push_back(' ');
      t += tokens[k];
    }
    unique.emplace(key, texts.size());
    texts.push_back(std::move(t));
  }
  std::vector<double> scored;
  try {
    scored = scorer(texts);
  } catch (const Error& e) {
    throw Error(std::string("lime_text: scorer failed on perturbations of '") + doc.substr(0, 40) + "': " + e.what());
  }
  if (scored.size() != texts.size()) throw ValidationError("lime_text: scorer returned wrong count");

  Eigen::VectorXd y(opt.n_samples), w(opt.n_samples);
  const double sqrt_m = std::sqrt(static_cast<double>(m));
  for (int s = 0; s < opt.n_samples; ++s) {
    y(s) = scored[unique.at(mask_keys[s])];
    double kept = z.row(s).sum();
    double d = kept > 0 ? 1.0 - kept / (std::sqrt(kept) * sqrt_m) : 1.0;
    w(s) = std::exp(-d * d / (opt.kernel_width * opt.kernel_width));
  }
  // Weighted ridge with an unpenalized intercept: center by weighted means.
  const double wsum = w.sum();
  Eigen::RowVectorXd zbar = (w.asDiagonal() * z).colwise().sum() / wsum;
  const double ybar = w.dot(y) / wsum;
  Eigen::MatrixXd zc = z.rowwise() - zbar;
  Eigen::VectorXd yc = y.array() - ybar;
  Eigen::MatrixXd a = zc.transpose() * w.asDiagonal() * zc;
  a.diagonal().array() += opt.ridge;
  Eigen::VectorXd beta = a.ldlt().solve(zc.transpose() * (w.asDiagonal() * yc));

  LimeExplanation ex;
  ex.n_samples = opt.n_samples;
  ex.kernel_width = opt.kernel_width;
  ex.original_score = y(0);
  ex.intercept = ybar - zbar.dot(beta);
  for (std::size_t j = 0; j < m; ++j) ex.words.push_back({words[j], beta(static_cast<Eigen::Index>(j))});
  Eigen::VectorXd resid = yc - zc * beta;
  double ss_res = w.dot(resid.cwiseAbs2());
  double ss_tot = w.dot(yc.cwiseAbs2());
  ex.local_r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return ex;
}

std::vector<WordImpact> aggregate_word_importance(const std::vector<LimeExplanation>& explanations,
                                                  const std::unordered_set<std::string>& stopwords,
                                                  std::size_t top_k) {
  // Contributions are sorted before summing so the result does not depend on
  // the order of the explanation list.
  std::map<std::string, std::vector<double>> acc;
  for (const auto& ex : explanations) {
    std::map<std::string, double> per_doc;
    for (const auto& w : ex.words) {
      if (stopwords.count(w.word) || text::is_punctuation(w.word)) continue;
      per_doc[text::stem(w.word)] += w.weight;
    }
    for (const auto& [s, v] : per_doc) acc[s].push_back(v);
  }
  std::vector<WordImpact> out;
  for (auto& [s, v] : acc) {
    std::sort(v.begin(), v.end());
    double sum = std::accumulate(v.begin(), v.end(), 0.0);
    out.push_back({s, sum / static_cast<double>(v.size()), v.size()});
  }
  std::stable_sort(out.begin(), out.end(), [](const WordImpact& a, const WordImpact& b) {
    return std::abs(a.mean_impact) > std::abs(b.mean_impact);
  });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

}  // namespace lendtext::explain
