#include "lendtext/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lendtext/core/error.hpp"
#include "lendtext/core/hash.hpp"
#include "lendtext/core/rng.hpp"

namespace lendtext::pipeline {

namespace {

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

bool parse_value(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

template <typename Int>
bool parse_int(const std::string& s, Int& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") return out = true, true;
  if (s == "false" || s == "0" || s == "no") return out = false, true;
  return false;
}

template <typename T, typename Parse>
bool parse_list(const std::string& s, std::vector<T>& out, Parse parse) {
  std::vector<T> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    T x{};
    if (!parse(trim(item), x)) return false;
    v.push_back(x);
  }
  out = std::move(v);
  return true;
}

struct Field {
  std::string section, key;
  std::function<bool(const std::string&)> set;
  std::function<nlohmann::json()> get;
};

template <typename T>
Field num(const char* sec, const char* key, T& ref) {
  return {sec, key,
          [&ref](const std::string& s) {
            if constexpr (std::is_floating_point_v<T>) {
              return parse_value(s, ref);
            } else {
              return parse_int(s, ref);
            }
          },
          [&ref] { return nlohmann::json(ref); }};
}

Field flag(const char* sec, const char* key, bool& ref) {
  return {sec, key, [&ref](const std::string& s) { return parse_bool(s, ref); },
          [&ref] { return nlohmann::json(ref); }};
}

Field text(const char* sec, const char* key, std::string& ref) {
  return {sec, key, [&ref](const std::string& s) { return ref = s, true; }, [&ref] { return nlohmann::json(ref); }};
}

Field path(const char* sec, const char* key, std::filesystem::path& ref) {
  return {sec, key, [&ref](const std::string& s) { return ref = s, true; },
          [&ref] { return nlohmann::json(ref.generic_string()); }};
}

Field doubles(const char* sec, const char* key, std::vector<double>& ref) {
  return {sec, key, [&ref](const std::string& s) { return parse_list(s, ref, parse_value); },
          [&ref] { return nlohmann::json(ref); }};
}

Field ints(const char* sec, const char* key, std::vector<int>& ref) {
  return {sec, key, [&ref](const std::string& s) { return parse_list(s, ref, parse_int<int>); },
          [&ref] { return nlohmann::json(ref); }};
}

std::vector<Field> fields(RunConfig& c) {
  auto& s = c.synth;
  auto& d = c.dl;
  return {
      num("run", "version", c.version),
      num("run", "seed", c.seed),
      path("run", "out", c.out),
      path("run", "data", c.data),
      num("run", "threads", c.threads),

      num("synth", "n_records", s.n_records),
      num("synth", "default_rate_new", s.default_rate_new),
      num("synth", "default_rate_existing", s.default_rate_existing),
      num("synth", "existing_fraction", s.existing_fraction),
      num("synth", "first_cohort", s.first_cohort),
      num("synth", "last_cohort", s.last_cohort),
      num("synth", "early_cohort_weight", s.early_cohort_weight),
      num("synth", "late_cohort_weight", s.late_cohort_weight),
      num("synth", "structured_signal", s.structured_signal),
      num("synth", "text_signal", s.text_signal),
      num("synth", "overlap", s.overlap),
      num("synth", "keyword_noise", s.keyword_noise),
      num("synth", "short_fraction", s.short_fraction),
      num("synth", "short_median_words", s.short_median_words),
      num("synth", "long_median_words", s.long_median_words),
      num("synth", "length_sigma", s.length_sigma),
      num("synth", "max_words", s.max_words),
      num("synth", "words_per_slot", s.words_per_slot),
      flag("synth", "drift", s.drift),
      num("synth", "drift_length_scale", s.drift_length_scale),
      num("synth", "drift_mean_shift", s.drift_mean_shift),
      num("synth", "text_seed", s.text_seed),

      num("split", "holdout_ratio", c.holdout_ratio),

      num("text", "min_df", c.text.min_df),
      num("text", "max_df", c.text.max_df),
      num("text", "variance_target", c.text.variance_target),
      num("text", "k_max", c.text.k_max),
      num("text", "k_override", c.text.k_override),
      num("text", "token_min_count", c.text.token_min_count),
      num("text", "max_length", c.text.max_length),

      doubles("lr", "l1_ratios", c.lr.l1_ratios),
      num("lr", "n_lambda", c.lr.n_lambda),
      num("lr", "decades", c.lr.decades),
      num("lr", "folds", c.lr.folds),

      ints("rf", "max_depth", c.rf.max_depth),
      ints("rf", "max_features", c.rf.max_features),
      doubles("rf", "max_features_fraction", c.rf.max_features_fraction),
      num("rf", "n_candidates", c.rf.n_candidates),
      num("rf", "folds", c.rf.folds),
      num("rf", "n_trees", c.rf.n_trees),

      flag("rfecv", "enabled", c.rfecv_enabled),
      num("rfecv", "folds", c.rfecv.folds),
      num("rfecv", "tolerance", c.rfecv.tolerance),
      flag("rfecv", "one_standard_error", c.rfecv.one_standard_error),
      num("rfecv", "n_trees", c.rfecv.n_trees),
      num("rfecv", "max_depth", c.rfecv.max_depth),

      ints("dl", "hidden", d.hidden),
      num("dl", "structured_lr", d.structured_lr),
      num("dl", "structured_epochs", d.structured_epochs),
      num("dl", "structured_batch", d.structured_batch),
      num("dl", "blocks", d.blocks),
      num("dl", "heads", d.heads),
      num("dl", "model_dim", d.model_dim),
      num("dl", "ff_dim", d.ff_dim),
      num("dl", "text_head_hidden", d.text_head_hidden),
      num("dl", "mask_prob", d.mask_prob),
      num("dl", "pretrain_epochs", d.pretrain_epochs),
      num("dl", "pretrain_lr", d.pretrain_lr),
      num("dl", "finetune_k", d.finetune_k),
      num("dl", "finetune_epochs", d.finetune_epochs),
      num("dl", "finetune_lr", d.finetune_lr),
      num("dl", "text_batch", d.text_batch),
      num("dl", "fusion_units", d.fusion_units),
      num("dl", "phase1_lr", d.phase1_lr),
      num("dl", "phase1_epochs", d.phase1_epochs),
      num("dl", "phase2_lr", d.phase2_lr),
      num("dl", "phase2_epochs", d.phase2_epochs),
      num("dl", "fusion_batch", d.fusion_batch),

      text("explain", "split", c.explain.split),
      num("explain", "repeats", c.explain.repeats),
      num("explain", "band_lo", c.explain.band_lo),
      num("explain", "band_hi", c.explain.band_hi),
      num("explain", "top_n", c.explain.top_n),
      num("explain", "lime_samples", c.explain.lime_samples),
      num("explain", "kernel_width", c.explain.kernel_width),
      num("explain", "top_k", c.explain.top_k),
  };
}

}  // namespace

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  synth.seed = derive_seed(s, "synth");
  lr.seed = derive_seed(s, "lr");
  rf.seed = derive_seed(s, "rf");
  rfecv.seed = derive_seed(s, "rfecv");
  rf.threads = threads;
  rfecv.threads = threads;
}

void RunConfig::validate() const {
  std::vector<std::string> errors;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  need(version == kConfigVersion, "run.version must be " + std::to_string(kConfigVersion));
  need(!out.empty(), "run.out must name an artifact directory");
  need(data.empty() || std::filesystem::exists(data), "run.data does not exist: " + data.string());
  need(threads >= 1, "run.threads must be >= 1");
  try {
    synth.validate();
  } catch (const ConfigError& e) {
    errors.push_back(e.what());
  }
  need(holdout_ratio > 0 && holdout_ratio < 1, "split.holdout_ratio must lie in (0, 1)");
  need(text.min_df >= 0 && text.min_df <= text.max_df && text.max_df <= 1, "text: need 0 <= min_df <= max_df <= 1");
  need(text.variance_target > 0 && text.variance_target <= 1, "text.variance_target must lie in (0, 1]");
  need(text.k_max >= 1, "text.k_max must be >= 1");
  need(text.max_length >= 2, "text.max_length must be >= 2");
  need(!lr.l1_ratios.empty(), "lr.l1_ratios must not be empty");
  for (double a : lr.l1_ratios) need(a >= 0 && a <= 1, "lr.l1_ratios entries must lie in [0, 1]");
  need(lr.n_lambda >= 1 && lr.decades > 0, "lr: n_lambda >= 1 and decades > 0 required");
  need(lr.folds >= 2, "lr.folds must be >= 2");
  need(!rf.max_depth.empty(), "rf.max_depth must not be empty");
  for (int v : rf.max_depth) need(v >= 1, "rf.max_depth entries must be >= 1");
  for (double f : rf.max_features_fraction) need(f > 0 && f <= 1, "rf.max_features_fraction entries must lie in (0, 1]");
  need(rf.n_candidates >= 1 && rf.folds >= 2 && rf.n_trees >= 1, "rf: n_candidates >= 1, folds >= 2, n_trees >= 1");
  need(rfecv.folds >= 2 && rfecv.n_trees >= 1 && rfecv.tolerance >= 0, "rfecv: folds >= 2, n_trees >= 1, tolerance >= 0");
  need(!dl.hidden.empty(), "dl.hidden must not be empty");
  for (int h : dl.hidden) need(h >= 1, "dl.hidden widths must be >= 1");
  need(dl.blocks >= 1 && dl.heads >= 1 && dl.model_dim >= 1 && dl.ff_dim >= 1, "dl: architecture sizes must be >= 1");
  need(dl.heads >= 1 && dl.model_dim % std::max(dl.heads, 1) == 0, "dl.model_dim must be divisible by dl.heads");
  need(dl.finetune_k >= 0 && dl.finetune_k <= dl.blocks, "dl.finetune_k must lie in [0, dl.blocks]");
  need(dl.mask_prob >= 0 && dl.mask_prob < 1, "dl.mask_prob must lie in [0, 1)");
  for (double r : {dl.structured_lr, dl.pretrain_lr, dl.finetune_lr, dl.phase1_lr, dl.phase2_lr}) {
    need(r > 0, "dl learning rates must be positive");
  }
  for (int e : {dl.structured_epochs, dl.pretrain_epochs, dl.finetune_epochs, dl.phase1_epochs, dl.phase2_epochs}) {
    need(e >= 0, "dl epoch counts must be >= 0");
  }
  need(dl.structured_batch >= 1 && dl.text_batch >= 1 && dl.fusion_batch >= 1, "dl batch sizes must be >= 1");
  need(dl.fusion_units >= 1 && dl.text_head_hidden >= 1, "dl head sizes must be >= 1");
  need(explain.split == "train" || explain.split == "holdout" || explain.split == "oot_early" ||
           explain.split == "oot_late",
       "explain.split must be one of train, holdout, oot_early, oot_late");
  need(explain.repeats >= 1, "explain.repeats must be >= 1");
  need(explain.band_lo <= explain.band_hi, "explain.band_lo must not exceed band_hi");
  need(explain.lime_samples >= 1 && explain.kernel_width > 0, "explain: lime_samples >= 1 and kernel_width > 0");
  if (!errors.empty()) {
    std::string msg = "invalid configuration (" + std::to_string(errors.size()) + " problem(s)):";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
}

nlohmann::json RunConfig::to_json() const {
  RunConfig copy = *this;
  nlohmann::json j;
  for (const auto& f : fields(copy)) j[f.section][f.key] = f.get();
  return j;
}

std::string RunConfig::hash() const {
  nlohmann::json j = to_json();
  // Output location and thread count do not affect results.
  j["run"].erase("out");
  j["run"].erase("threads");
  return sha256_hex(j.dump());
}

RunConfig parse_config(const std::string& content) {
  boost::property_tree::ptree tree;
  std::istringstream in(content);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }
  RunConfig c;
  auto table = fields(c);
  std::map<std::pair<std::string, std::string>, Field*> index;
  for (auto& f : table) index[{f.section, f.key}] = &f;

  std::vector<std::string> errors;
  bool seed_given = false;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      errors.push_back("key '" + section + "' outside any section");
      continue;
    }
    for (const auto& [key, value] : body) {
      auto it = index.find({section, key});
      if (it == index.end()) {
        errors.push_back("unknown key " + section + "." + key);
        continue;
      }
      std::string v = trim(value.data());
      if (!it->second->set(v)) errors.push_back("bad value for " + section + "." + key + ": '" + v + "'");
      if (section == "run" && key == "seed") seed_given = true;
    }
  }
  if (!seed_given) errors.push_back("run.seed is mandatory");
  c.set_seed(c.seed);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    std::string what = e.what();
    std::istringstream lines(what);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) errors.push_back(trim(line.substr(line.find('-') + 1)));
  }
  if (!errors.empty()) {
    std::string msg = "invalid configuration (" + std::to_string(errors.size()) + " problem(s)):";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot read config file " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace lendtext::pipeline
