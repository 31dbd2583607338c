#include "lendtext/core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "lendtext/core/error.hpp"
#include "lendtext/core/rng.hpp"

namespace lendtext::synth {

namespace {

// clang-format off
const std::vector<std::string> kStopwords = {
  "the", "a", "an", "of", "to", "in", "for", "and", "is", "are", "has", "have",
  "with", "on", "at", "by", "from", "this", "that", "it", "its", "their", "they",
  "which", "as", "be", "was", "per", "also", "very", "more", "some", "about",
  "who", "been", "will", "can", "our", "into", "there"};

const std::vector<std::string> kRiskKeywords = {
  "workshop", "clothing", "season", "hairdressing", "grocery", "travelling",
  "invest", "working", "arrears", "unpaid", "irregular", "overdue"};

const std::vector<std::string> kSafeKeywords = {
  "agricultural", "supplies", "vehicle", "emergency", "purchase", "farmer",
  "old", "machinery", "diversified", "contracted", "insured", "certified"};

const std::vector<std::string> kNouns = {
  "client", "business", "partner", "firm", "company", "owner", "family", "shop",
  "store", "market", "stall", "product", "products", "goods", "sales", "income",
  "costs", "expenses", "profit", "margin", "customers", "suppliers", "materials",
  "stock", "inventory", "equipment", "tools", "premises", "house", "land", "crop",
  "crops", "harvest", "animals", "cattle", "milk", "bread", "bakery", "restaurant",
  "kitchen", "food", "drinks", "coffee", "fruit", "vegetables", "meat", "fish",
  "bricks", "cement", "wood", "firewood", "furniture", "carpentry", "repairs",
  "services", "transport", "truck", "motorcycle", "taxi", "route", "deliveries",
  "orders", "contracts", "clients", "neighbours", "community", "town", "village",
  "district", "street", "avenue", "centre", "corner", "building", "room", "space",
  "warehouse", "office", "bank", "lender", "loan", "credit", "payment", "payments",
  "instalment", "instalments", "amount", "term", "months", "years", "weeks", "days",
  "experience", "activity", "operation", "operations", "production", "capacity",
  "demand", "prices", "price", "quality", "quantity", "volume", "turnover", "cash",
  "flow", "savings", "assets", "liabilities", "debts", "guarantee", "guarantor",
  "collateral", "spouse", "children", "son", "daughter", "husband", "wife",
  "relatives", "employees", "workers", "staff", "team", "help", "support",
  "references", "history", "record", "behaviour", "visit", "interview", "officer",
  "assessment", "report", "request", "application", "plan", "project", "growth",
  "expansion", "improvement", "renovation", "roof", "walls", "floor", "paint",
  "shelves", "fridge", "oven", "machine", "sewing", "fabric", "shoes", "bags",
  "cosmetics", "perfumes", "phones", "accessories", "hardware", "paper",
  "printing", "school", "uniforms", "books", "toys", "gifts", "flowers", "plants",
  "seeds", "fertiliser", "fertilisers", "inputs", "irrigation", "water", "electricity",
  "gas", "fuel", "rent", "tax", "registration", "permit", "licence", "association",
  "cooperative", "group", "fair", "holiday", "weekend", "morning", "afternoon",
  "hours", "schedule", "location", "area", "zone", "region", "sector", "industry",
  "competition", "competitors", "advantage", "reputation", "trust", "contact",
  "mobile", "account", "balance", "receipts", "invoices", "documents", "notes",
  "details", "information", "situation", "condition", "conditions", "capital"};

const std::vector<std::string> kVerbs = {
  "sells", "buys", "produces", "makes", "offers", "provides", "manages", "runs",
  "owns", "rents", "works", "operates", "delivers", "prepares", "grows", "raises",
  "keeps", "maintains", "repairs", "builds", "installs", "distributes",
  "markets", "trades", "exports", "imports", "stores", "cleans", "cooks", "bakes",
  "sews", "paints", "drives", "serves", "attends", "visits", "receives", "pays",
  "earns", "saves", "spends", "needs", "wants", "plans", "hopes", "expects",
  "requires", "uses", "shows", "presents", "explains", "confirms", "reports",
  "mentions", "noted", "relates", "covers", "includes", "supports", "improves",
  "increases", "reduces", "expands", "started", "began", "continues", "depends",
  "lives", "knows"};

const std::vector<std::string> kAdjectives = {
  "small", "large", "new", "local", "main", "current", "regular", "stable",
  "good", "adequate", "sufficient", "modest", "high", "low", "monthly", "weekly",
  "daily", "annual", "additional", "basic", "own", "rented", "family", "formal",
  "commercial", "residential", "rural", "urban", "central", "nearby", "busy",
  "quiet", "clean", "organised", "responsible", "punctual", "reliable", "young",
  "experienced", "independent", "seasonal", "permanent", "temporary", "fixed",
  "variable", "average", "total", "net", "gross", "previous", "next", "future",
  "recent", "several", "various", "different", "similar", "important", "necessary",
  "available", "simple", "complete", "partial", "direct", "long", "short",
  "second", "first", "third", "wide", "growing"};
// clang-format on

const std::vector<std::string> kCarriers[] = {
    {"the", "officer", "mentions", "#"},
    {"the", "assessment", "notes", "#"},
    {"the", "request", "relates", "to", "#"},
    {"#", "is", "noted", "in", "the", "report"},
};

constexpr double kPlantedThreshold = 1.0;

struct ContinuousSpec {
  const char* name;
  double weight;  // effect of the standardized latent on the default logit
};

// Order matters: it defines the schema column order.
const ContinuousSpec kContinuous[] = {
    {"applicant_age", -0.15}, {"business_age", -0.45}, {"monthly_sales", -0.40},
    {"loan_amount", 0.30},    {"term_months", 0.20},   {"payment_history", 1.00},
    {"noise_1", 0.0},
};

struct CategoricalSpec {
  const char* name;
  double weight;
  std::vector<std::string> levels;
  std::vector<double> effects;  // raw per-level effects, standardized at runtime
};

const std::vector<CategoricalSpec>& categorical_specs() {
  static const std::vector<CategoricalSpec> specs = {
      {"region", 0.45,
       {"r01", "r02", "r03", "r04", "r05", "r06", "r07", "r08", "r09", "r10"},
       {0.3, -1.2, 0.9, 0.1, -0.4, 1.5, -0.8, 0.0, 0.6, -1.0}},
      {"industry", 0.40,
       {"retail", "farming", "manufacturing", "services", "transport", "food", "textiles",
        "construction"},
       {0.5, -1.1, 0.2, -0.3, 0.9, 0.1, 1.2, -0.6}},
      {"credit_type", 0.50, {"new", "renewal", "refinance"}, {0.3, -1.0, 1.2}},
      {"civil_status", 0.0, {"single", "married", "divorced", "widowed"}, {0, 0, 0, 0}},
  };
  return specs;
}

std::vector<double> standardized(const std::vector<double>& e) {
  double mean = 0, var = 0;
  for (double v : e) mean += v;
  mean /= e.size();
  for (double v : e) var += (v - mean) * (v - mean);
  var /= e.size();
  std::vector<double> out(e.size(), 0.0);
  if (var <= 0) return out;
  for (std::size_t i = 0; i < e.size(); ++i) out[i] = (e[i] - mean) / std::sqrt(var);
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Intercept a with E[sigmoid(a + sd * Z)] = rate, Z standard normal.
double calibrate_intercept(double rate, double sd) {
  auto mean_rate = [&](double a) {
    const int n = 801;
    double h = 16.0 / (n - 1), acc = 0, wsum = 0;
    for (int i = 0; i < n; ++i) {
      double z = -8.0 + i * h;
      double w = std::exp(-0.5 * z * z) * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
      acc += w * sigmoid(a + sd * z);
      wsum += w;
    }
    return acc / wsum;
  };
  double lo = -30, hi = 30;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (mean_rate(mid) < rate ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Zipf-like pick so that filler words spread over a range of document frequencies.
const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  // inverse-CDF of p(k) ~ 1/(k+2) approximated by exponentiating a uniform
  double u = uniform01(rng);
  double n = static_cast<double>(pool.size());
  double k = (n + 2.0) * std::pow(2.0 / (n + 2.0), 1.0 - u) - 2.0;
  auto idx = std::min(pool.size() - 1, static_cast<std::size_t>(std::max(0.0, k)));
  return pool[idx];
}

std::vector<std::string> filler_sentence(Rng& rng) {
  std::vector<std::string> w;
  double u = uniform01(rng);
  if (u < 0.4) {
    w.push_back("the");
    if (uniform01(rng) < 0.5) w.push_back(pick(kAdjectives, rng));
    w.push_back(pick(kNouns, rng));
    w.push_back(pick(kVerbs, rng));
    w.push_back("the");
    if (uniform01(rng) < 0.4) w.push_back(pick(kAdjectives, rng));
    w.push_back(pick(kNouns, rng));
  } else if (u < 0.7) {
    w.push_back("the");
    w.push_back(pick(kNouns, rng));
    w.push_back(pick(kVerbs, rng));
    w.push_back(pick(kNouns, rng));
    w.push_back(uniform01(rng) < 0.5 ? "in" : "for");
    w.push_back("the");
    w.push_back(pick(kNouns, rng));
  } else {
    w.push_back(pick(kNouns, rng));
    w.push_back("and");
    w.push_back(pick(kNouns, rng));
    w.push_back(uniform01(rng) < 0.5 ? "are" : "have");
    w.push_back(pick(kAdjectives, rng));
  }
  return w;
}

std::vector<std::string> signal_sentence(double value, Rng& rng) {
  std::string kw;
  if (value > kPlantedThreshold) {
    kw = kPlantedRiskKeyword;
  } else if (value > 0) {
    kw = kRiskKeywords[uniform_index(rng, kRiskKeywords.size())];
  } else if (value >= -kPlantedThreshold) {
    kw = kSafeKeywords[uniform_index(rng, kSafeKeywords.size())];
  } else {
    kw = kPlantedSafeKeyword;
  }
  std::vector<std::string> words = kCarriers[uniform_index(rng, std::size(kCarriers))];
  for (auto& w : words) {
    if (w == "#") w = kw;
  }
  return words;
}

int draw_cohort(const SynthConfig& c, Rng& rng) {
  int k = c.last_cohort - c.first_cohort + 1;
  double u = uniform01(rng);
  if (u < c.early_cohort_weight) return c.first_cohort;
  if (u < c.early_cohort_weight + c.late_cohort_weight) return c.last_cohort;
  double middle = 1.0 - c.early_cohort_weight - c.late_cohort_weight;
  double v = (u - c.early_cohort_weight - c.late_cohort_weight) / middle;
  int offset = std::min(k - 3, static_cast<int>(v * (k - 2)));
  return c.first_cohort + 1 + offset;
}

}  // namespace

void SynthConfig::validate() const {
  std::vector<std::string> errors;
  auto in_open01 = [&](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) errors.push_back(std::string(name) + " must lie in (0, 1)");
  };
  if (n_records == 0) errors.push_back("n_records must be positive");
  in_open01(default_rate_new, "default_rate_new");
  in_open01(default_rate_existing, "default_rate_existing");
  if (!(existing_fraction >= 0.0 && existing_fraction <= 1.0)) {
    errors.push_back("existing_fraction must lie in [0, 1]");
  }
  if (last_cohort - first_cohort < 2) errors.push_back("need at least 3 cohorts");
  if (early_cohort_weight < 0 || late_cohort_weight < 0 ||
      early_cohort_weight + late_cohort_weight >= 1.0) {
    errors.push_back("cohort weights must be non-negative and leave room for core cohorts");
  }
  if (!(overlap >= 0.0 && overlap <= 1.0)) errors.push_back("overlap must lie in [0, 1]");
  if (structured_signal < 0) errors.push_back("structured_signal must be non-negative");
  if (text_signal < 0) errors.push_back("text_signal must be non-negative");
  if (keyword_noise < 0) errors.push_back("keyword_noise must be non-negative");
  if (!(short_fraction >= 0.0 && short_fraction <= 1.0)) {
    errors.push_back("short_fraction must lie in [0, 1]");
  }
  if (short_median_words <= 0 || long_median_words <= 0) {
    errors.push_back("median word counts must be positive");
  }
  if (length_sigma < 0) errors.push_back("length_sigma must be non-negative");
  if (max_words < 1) errors.push_back("max_words must be at least 1");
  if (words_per_slot <= 0) errors.push_back("words_per_slot must be positive");
  if (!(drift_length_scale > 0.0 && drift_length_scale <= 1.0)) {
    errors.push_back("drift_length_scale must lie in (0, 1]");
  }
  if (!errors.empty()) {
    std::string msg = "invalid synth config:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
}

FeatureSchema default_schema() {
  FeatureSchema s;
  for (const auto& c : kContinuous) s.continuous_names.emplace_back(c.name);
  for (const auto& c : categorical_specs()) s.categorical_names.emplace_back(c.name);
  return s;
}

std::vector<std::string> noise_features() {
  std::vector<std::string> out;
  for (const auto& c : kContinuous)
    if (c.weight == 0.0) out.emplace_back(c.name);
  for (const auto& c : categorical_specs())
    if (c.weight == 0.0) out.emplace_back(c.name);
  return out;
}

std::vector<std::string> informative_features() {
  std::vector<std::string> out;
  for (const auto& c : kContinuous)
    if (c.weight != 0.0) out.emplace_back(c.name);
  for (const auto& c : categorical_specs())
    if (c.weight != 0.0) out.emplace_back(c.name);
  return out;
}

const std::vector<std::string>& risk_keywords() { return kRiskKeywords; }
const std::vector<std::string>& safe_keywords() { return kSafeKeywords; }
const std::vector<std::string>& stopwords() { return kStopwords; }

std::vector<std::string> vocabulary() {
  std::set<std::string> all;
  for (const auto* pool : {&kStopwords, &kRiskKeywords, &kSafeKeywords, &kNouns, &kVerbs,
                           &kAdjectives}) {
    all.insert(pool->begin(), pool->end());
  }
  for (const auto& c : kCarriers) {
    for (const auto& w : c)
      if (w != "#") all.insert(w);
  }
  all.insert(kPlantedRiskKeyword);
  all.insert(kPlantedSafeKeyword);
  return {all.begin(), all.end()};
}

std::vector<std::string> keyword_profile(const std::string& text) {
  static const std::unordered_set<std::string> keywords = [] {
    std::unordered_set<std::string> k(kRiskKeywords.begin(), kRiskKeywords.end());
    k.insert(kSafeKeywords.begin(), kSafeKeywords.end());
    k.insert(kPlantedRiskKeyword);
    k.insert(kPlantedSafeKeyword);
    return k;
  }();
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) {
    while (!w.empty() && std::ispunct(static_cast<unsigned char>(w.back()))) w.pop_back();
    for (auto& ch : w) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (keywords.count(w)) out.push_back(w);
  }
  return out;
}

std::size_t word_count(const std::string& text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char ch : text) {
    bool alnum = std::isalnum(static_cast<unsigned char>(ch)) != 0;
    if (alnum && !in_word) ++n;
    in_word = alnum;
  }
  return n;
}

Dataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  Dataset ds;
  ds.schema = default_schema();

  const auto& cats = categorical_specs();
  std::vector<std::vector<double>> cat_effects;
  for (const auto& c : cats) cat_effects.push_back(standardized(c.effects));

  double weight_sq = 0;
  for (const auto& c : kContinuous) weight_sq += c.weight * c.weight;
  for (const auto& c : cats) weight_sq += c.weight * c.weight;
  const double s_scale = weight_sq > 0 ? config.structured_signal / std::sqrt(weight_sq) : 0.0;

  const double rho = config.overlap;
  const double independent = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const double logit_sd = std::sqrt(config.structured_signal * config.structured_signal +
                                    std::pow(config.text_signal * independent, 2));
  const double alpha_new = calibrate_intercept(config.default_rate_new, logit_sd);
  const double alpha_existing = calibrate_intercept(config.default_rate_existing, logit_sd);

  const std::uint64_t structured_seed = derive_seed(config.seed, "structured");
  const std::uint64_t surface_seed = derive_seed(config.seed, "surface");
  const std::uint64_t text_seed =
      config.text_seed != 0 ? config.text_seed : derive_seed(config.seed, "text");

  std::size_t overlap_index = 0;
  for (std::size_t j = 0; j < std::size(kContinuous); ++j) {
    if (std::string(kContinuous[j].name) == kOverlapFeature) overlap_index = j;
  }

  ds.records.reserve(config.n_records);
  for (std::size_t i = 0; i < config.n_records; ++i) {
    Rng srng(derive_seed(structured_seed, i));
    Rng surf(derive_seed(surface_seed, i));
    Rng trng(derive_seed(text_seed, i));

    LoanRecord rec;
    rec.id = static_cast<std::int64_t>(i + 1);
    rec.segment = uniform01(srng) < config.existing_fraction ? Segment::Existing : Segment::New;
    rec.cohort = draw_cohort(config, srng);
    const bool drifted = config.drift && rec.cohort == config.last_cohort;

    // Structured latents.
    double s = 0;
    std::vector<double> z(std::size(kContinuous));
    for (std::size_t j = 0; j < z.size(); ++j) {
      z[j] = standard_normal(srng);
      const std::string name = kContinuous[j].name;
      if (drifted && (name == "business_age" || name == "monthly_sales")) {
        z[j] -= config.drift_mean_shift;
      }
      s += kContinuous[j].weight * z[j];
    }
    rec.continuous = {
        std::clamp(40.0 + 11.0 * z[0], 18.0, 80.0),
        std::exp(1.5 + 0.7 * z[1]),
        std::exp(8.0 + 0.8 * z[2]),
        std::exp(7.5 + 0.6 * z[3]),
        std::round(6.0 + 30.0 * normal_cdf(z[4])),
        std::exp(2.0 + 0.8 * z[5]),
        50.0 + 5.0 * z[6],
    };
    for (std::size_t c = 0; c < cats.size(); ++c) {
      std::size_t level = uniform_index(srng, cats[c].levels.size());
      rec.categorical.push_back(cats[c].levels[level]);
      s += cats[c].weight * cat_effects[c][level];
    }
    s *= s_scale;

    // Text latent: part duplicates a structured latent, the rest is private to the text.
    const double u = standard_normal(trng);
    const double t = rho * z[overlap_index] + independent * u;

    const double alpha = rec.segment == Segment::New ? alpha_new : alpha_existing;
    const double p = sigmoid(alpha + s + config.text_signal * independent * u);
    rec.label = uniform01(srng) < p ? 1 : 0;

    // Surface text.
    const bool short_doc = uniform01(surf) < config.short_fraction;
    const double median = short_doc ? config.short_median_words : config.long_median_words;
    double words = median * std::exp(config.length_sigma * standard_normal(surf));
    if (drifted) words *= config.drift_length_scale;
    const int target = std::clamp(static_cast<int>(std::lround(words)), 1, config.max_words);
    const int slots = static_cast<int>(target / config.words_per_slot);

    std::vector<std::vector<std::string>> sentences;
    int produced = 0;
    for (int k = 0; k < slots; ++k) {
      double value = t + config.keyword_noise * standard_normal(surf);
      sentences.push_back(signal_sentence(value, surf));
      produced += static_cast<int>(sentences.back().size());
    }
    while (produced < target) {
      auto f = filler_sentence(surf);
      int room = target - produced;
      if (static_cast<int>(f.size()) > room) f.resize(room);
      produced += static_cast<int>(f.size());
      sentences.push_back(std::move(f));
    }
    // Deterministic placement of the signal sentences among the filler.
    shuffle_in_place(sentences, surf);

    std::string text;
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      std::string sentence;
      for (std::size_t w = 0; w < sentences[k].size(); ++w) {
        if (w) sentence.push_back(' ');
        sentence += sentences[k][w];
      }
      sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
      if (k) text.push_back(' ');
      text += sentence;
      text += (k % 3 == 1) ? "," : ".";
    }
    rec.text = std::move(text);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace lendtext::synth
