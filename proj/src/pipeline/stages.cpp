#include "lendtext/pipeline/stages.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lendtext/core/csv.hpp"
#include "lendtext/core/error.hpp"
#include "lendtext/core/hash.hpp"
#include "lendtext/core/rng.hpp"
#include "lendtext/core/synth.hpp"
#include "lendtext/eval/metrics.hpp"

#ifndef LENDTEXT_VERSION
#define LENDTEXT_VERSION "0.0.0"
#endif

namespace lendtext::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string library_version() { return LENDTEXT_VERSION; }

fs::path layout::model_file(ModelKind m, Subset s) {
  return fs::path(kModelDir) / (to_string(m) + "_" + to_string(s) + ".json");
}

bool Selection::matches(ModelKind m, Subset s) const {
  return (!model || *model == m) && (!subset || *subset == s);
}

DirectoryLock::DirectoryLock(const fs::path& out) : path_(out / layout::kLock) {
  fs::create_directories(out);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) {
    throw Error("artifact directory " + out.string() + " is locked by another command (delete " + path_.string() +
                " if no command is running)");
  }
  std::fclose(f);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void require(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw DependencyError("missing " + path.string() + "; run `lendtext_cli " + producer + "` first");
  }
}

std::string train_command(ModelKind m, Subset s) {
  return "train --model " + to_string(m) + " --subset " + to_string(s);
}

// Records a stage's wall-clock time outside the manifest.
class StageTimer {
 public:
  StageTimer(const RunConfig& config, std::string stage)
      : config_(config), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  void finish() {
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    fs::path path = config_.out / layout::kTimings;
    json t = fs::exists(path) ? read_json(path) : json::object();
    t[stage_] = secs;
    write_json(path, t);
    write_manifest(config_);
  }

 private:
  const RunConfig& config_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

json canonical_config(const RunConfig& config) {
  json j = config.to_json();
  if (j.contains("run")) {
    j["run"].erase("out");
    j["run"].erase("threads");
  }
  return j;
}

SplitName parse_split(const std::string& s) {
  for (auto sp : kAllSplits)
    if (to_string(sp) == s) return sp;
  throw ValidationError("unknown split '" + s + "'");
}

std::vector<std::size_t> columns_for(const RunConfig& config, const Prepared& p) {
  fs::path path = config.out / layout::kPrepDir / "rfecv.json";
  if (config.rfecv_enabled) {
    require(path, "prep");
    return read_json(path).at("selected").get<std::vector<std::size_t>>();
  }
  std::vector<std::size_t> all(p.structured_names.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

void save_model(const RunConfig& config, AnyModel& m) {
  write_json(config.out / layout::model_file(m.kind, m.subset), m.to_json());
}

}  // namespace

json build_manifest(const RunConfig& config) {
  const std::unordered_set<std::string> skip = {layout::kManifest, layout::kTimings, layout::kLock};
  std::vector<fs::path> files;
  if (fs::exists(config.out)) {
    for (const auto& e : fs::recursive_directory_iterator(config.out)) {
      if (!e.is_regular_file()) continue;
      fs::path rel = fs::relative(e.path(), config.out);
      if (skip.count(rel.generic_string()) || e.path().extension() == ".tmp") continue;
      files.push_back(rel);
    }
  }
  std::sort(files.begin(), files.end());
  json artifacts = json::array();
  for (const auto& rel : files) {
    artifacts.push_back({{"path", rel.generic_string()},
                         {"sha256", sha256_file(config.out / rel)},
                         {"bytes", fs::file_size(config.out / rel)}});
  }
  return {{"format", "lendtext.manifest"},
          {"version", 1},
          {"library_version", library_version()},
          {"config_hash", config.hash()},
          {"timings_file", layout::kTimings},
          {"artifacts", artifacts}};
}

void write_manifest(const RunConfig& config) { write_json(config.out / layout::kManifest, build_manifest(config)); }

void cmd_synth(const RunConfig& config) {
  StageTimer timer(config, "synth");
  Dataset d;
  if (config.data.empty()) {
    d = synth::generate_synthetic(config.synth);
  } else {
    if (!fs::exists(config.data)) throw ConfigError("run.data: file not found: " + config.data.string());
    d = load_dataset(config.data, synth::default_schema());
  }
  d.validate();
  write_text(config.out / layout::kDataset, serialize_dataset(d));
  write_json(config.out / layout::kConfig, canonical_config(config));
  timer.finish();
}

void cmd_prep(const RunConfig& config) {
  StageTimer timer(config, "prep");
  fs::path data = config.out / layout::kDataset;
  require(data, "synth");
  Prepared p = prepare(load_dataset(data, synth::default_schema()), config);
  fs::path dir = config.out / layout::kPrepDir;
  write_json(dir / "splits.json", p.splits.to_json());
  write_json(dir / "scaler.json", p.scaler.to_json());
  write_json(dir / "codec.json", p.codec.to_json());
  write_json(dir / "lsa.json", p.lsa.to_json());
  write_json(dir / "tokens.json", p.tokens.to_json());
  write_json(dir / "prep.json", {{"format", "lendtext.prep"},
                                  {"version", 1},
                                  {"max_length", p.max_length},
                                  {"stopwords", p.stopwords},
                                  {"wordcount_thresholds", p.wordcount_thresholds},
                                  {"structured_features", p.structured_names},
                                  {"lsa_rank", p.lsa.k},
                                  {"lsa_capped", p.lsa.capped},
                                  {"token_vocabulary_size", p.tokens.size()}});

  csv::Row header = {"id", "split"};
  for (const auto& n : p.structured_names) header.push_back(n);
  for (std::size_t c = 0; c < p.lsa.k; ++c) header.push_back("concept_" + std::to_string(c + 1));
  std::vector<std::string> split_of(p.dataset.size());
  for (auto sp : kAllSplits)
    for (auto r : p.splits.get(sp)) split_of[r] = to_string(sp);
  std::string encoded = csv::format_row(header);
  for (std::size_t i = 0; i < p.dataset.size(); ++i) {
    csv::Row row = {p.ids[i], split_of[i]};
    for (Eigen::Index c = 0; c < p.structured.cols(); ++c) row.push_back(fmt(p.structured(static_cast<Eigen::Index>(i), c)));
    for (Eigen::Index c = 0; c < p.concepts.cols(); ++c) row.push_back(fmt(p.concepts(static_cast<Eigen::Index>(i), c)));
    encoded += csv::format_row(row);
  }
  write_text(dir / "encoded.csv", encoded);

  fs::path rfecv = dir / "rfecv.json";
  if (config.rfecv_enabled) {
    write_json(rfecv, run_rfecv(p, config).to_json());
  } else {
    fs::remove(rfecv);
  }
  timer.finish();
}

Prepared load_prepared(const RunConfig& config) {
  fs::path dir = config.out / layout::kPrepDir;
  for (const char* f : {"splits.json", "scaler.json", "codec.json", "lsa.json", "tokens.json", "prep.json"})
    require(dir / f, "prep");
  require(config.out / layout::kDataset, "synth");
  try {
    json meta = read_json(dir / "prep.json");
    return reencode(load_dataset(config.out / layout::kDataset, synth::default_schema()),
                    DataSplits::from_json(read_json(dir / "splits.json")),
                    ScalerParams::from_json(read_json(dir / "scaler.json")),
                    CategoryCodec::from_json(read_json(dir / "codec.json")),
                    text::LsaModel::from_json(read_json(dir / "lsa.json")),
                    text::TokenVocabulary::from_json(read_json(dir / "tokens.json")),
                    meta.at("stopwords").get<std::vector<std::string>>(),
                    meta.at("wordcount_thresholds").get<std::vector<double>>(),
                    meta.at("max_length").get<std::size_t>());
  } catch (const json::exception& e) {
    throw SchemaError(std::string("prep artifacts: ") + e.what());
  }
}

AnyModel load_model(const RunConfig& config, ModelKind m, Subset s) {
  fs::path path = config.out / layout::model_file(m, s);
  require(path, train_command(m, s));
  return AnyModel::from_json(read_json(path));
}

void cmd_train(const RunConfig& config, const Selection& selection) {
  StageTimer timer(config, "train");
  Prepared p = load_prepared(config);
  std::vector<std::size_t> columns = columns_for(config, p);
  for (auto m : {ModelKind::LR, ModelKind::RF}) {
    for (auto s : kAllSubsets) {
      if (!selection.matches(m, s)) continue;
      AnyModel model = train_baseline(p, m, s, columns, config);
      save_model(config, model);
    }
  }
  if (selection.matches(ModelKind::DL, Subset::Structured)) {
    AnyModel model = train_dl_structured(p, config);
    save_model(config, model);
  }
  if (selection.matches(ModelKind::DL, Subset::Text)) {
    AnyModel model = train_dl_text(p, config);
    save_model(config, model);
  }
  if (selection.matches(ModelKind::DL, Subset::Combined)) {
    AnyModel structured = load_model(config, ModelKind::DL, Subset::Structured);
    AnyModel text = load_model(config, ModelKind::DL, Subset::Text);
    AnyModel model = train_dl_combined(p, structured, text, config);
    save_model(config, model);
  }
  timer.finish();
}

void cmd_evaluate(const RunConfig& config, const Selection& selection) {
  StageTimer timer(config, "evaluate");
  Prepared p = load_prepared(config);
  fs::path dir = config.out / layout::kEvalDir;
  std::vector<eval::PredictionSet> all;
  std::map<std::string, std::vector<eval::PredictionSet>> by_split;
  json curves = json::array();
  for (auto m : kAllModels) {
    for (auto s : kAllSubsets) {
      if (!selection.matches(m, s)) continue;
      AnyModel model = load_model(config, m, s);
      for (auto sp : kAllSplits) {
        eval::PredictionSet set = prediction_set(p, model, sp);
        std::string stem = model.tag() + "_" + to_string(sp);
        for (const char* seg : {"all", "new", "existing"})
          write_text(dir / "predictions" / (stem + "_" + seg + ".csv"), set.filter_segment(seg).to_csv());
        if (s != Subset::Structured) {
          auto curve = eval::auc_by_wordcount(set, p.wordcount_thresholds);
          fs::path cpath = fs::path("wordcount") / (stem + ".csv");
          write_text(dir / cpath, curve.to_csv());
          curves.push_back({{"model", set.model}, {"subset", set.subset}, {"split", set.split},
                            {"file", (fs::path(layout::kEvalDir) / cpath).generic_string()},
                            {"curve", curve.to_json()}});
        }
        by_split[set.split].push_back(set);
        all.push_back(std::move(set));
      }
    }
  }
  eval::ReportGrid grid = eval::segment_report(all);
  write_json(dir / "metrics.json", grid.to_json());
  write_text(dir / "metrics.csv", grid.to_csv());
  write_json(dir / "wordcount_curves.json", curves);
  json corr = json::object();
  for (const auto& [split, sets] : by_split) {
    if (sets.size() < 2) continue;
    for (const char* seg : {"all", "new", "existing"}) corr[split][seg] = eval::correlation_matrix(sets, seg).to_json();
  }
  write_json(dir / "correlations.json", corr);
  timer.finish();
}

void cmd_explain(const RunConfig& config) {
  StageTimer timer(config, "explain");
  Prepared p = load_prepared(config);
  AnyModel structured = load_model(config, ModelKind::DL, Subset::Structured);
  AnyModel combined = load_model(config, ModelKind::DL, Subset::Combined);
  const auto& ex = config.explain;
  const auto& rows = p.splits.get(parse_split(ex.split));
  auto y = gather_labels(p, rows);
  fs::path dir = config.out / layout::kExplainDir;

  std::uint64_t perm_seed = derive_seed(config.seed, "permutation");
  auto imp_s = explain::permutation_importance(structured.feature_names(p), structured.permuted_scorer(p, rows), y,
                                               ex.repeats, perm_seed);
  auto imp_c = explain::permutation_importance(combined.feature_names(p), combined.permuted_scorer(p, rows), y,
                                               ex.repeats, perm_seed);
  write_json(dir / "importance_dl_structured.json", imp_s.to_json());
  write_text(dir / "importance_dl_structured.csv", imp_s.to_csv());
  write_json(dir / "importance_dl_combined.json", imp_c.to_json());
  write_text(dir / "importance_dl_combined.csv", imp_c.to_csv());
  write_json(dir / "importance_shift.json", explain::importance_shift(imp_s, imp_c).to_json());

  std::vector<std::string> ids;
  for (auto r : rows) ids.push_back(p.ids[r]);
  auto s_scores = structured.predict(p, rows);
  auto c_scores = combined.predict(p, rows);
  auto selection = explain::select_uncertain_improved(ids, s_scores, c_scores, y, ex.band_lo, ex.band_hi, ex.top_n);
  write_json(dir / "uncertain_cases.json", selection.to_json());

  std::unordered_map<std::string, std::size_t> row_of;
  for (auto r : rows) row_of[p.ids[r]] = r;
  std::vector<explain::LimeExplanation> lime;
  json lime_json = json::array();
  for (const auto& c : selection.cases) {
    std::size_t r = row_of.at(c.id);
    explain::LimeOptions lo;
    lo.n_samples = ex.lime_samples;
    lo.kernel_width = ex.kernel_width;
    lo.seed = derive_seed(derive_seed(config.seed, "lime"), c.id);
    auto e = explain::lime_text(combined.text_scorer(p, r), p.dataset.records[r].text, lo);
    e.doc_id = c.id;
    lime_json.push_back(e.to_json());
    lime.push_back(std::move(e));
  }
  write_json(dir / "lime.json", lime_json);

  std::unordered_set<std::string> stop(p.stopwords.begin(), p.stopwords.end());
  auto words = explain::aggregate_word_importance(lime, stop, ex.top_k);
  std::string table = csv::format_row({"rank", "stem", "mean_impact", "documents"});
  for (std::size_t i = 0; i < words.size(); ++i)
    table += csv::format_row({std::to_string(i + 1), words[i].stem, fmt(words[i].mean_impact),
                              std::to_string(words[i].documents)});
  write_text(dir / "top_words.csv", table);
  timer.finish();
}

void cmd_report(const RunConfig& config) {
  StageTimer timer(config, "report");
  fs::path eval_dir = config.out / layout::kEvalDir;
  fs::path ex_dir = config.out / layout::kExplainDir;
  require(eval_dir / "metrics.json", "evaluate");
  for (const char* f : {"importance_shift.json", "uncertain_cases.json", "top_words.csv", "lime.json"})
    require(ex_dir / f, "explain");
  json grid = read_json(eval_dir / "metrics.json");
  json meta = read_json(config.out / layout::kPrepDir / "prep.json");

  std::ostringstream md;
  md << "# Experiment report\n\n";
  md << "- config hash: `" << config.hash() << "`\n";
  md << "- library version: " << library_version() << "\n";
  md << "- dataset: [" << layout::kDataset << "](" << layout::kDataset << ")\n";
  md << "- LSA rank: " << meta.at("lsa_rank").get<std::size_t>() << " ([prep/lsa.json](prep/lsa.json))\n\n";

  md << "## AUC by model and subset (all segments)\n\n";
  md << "Source: [eval/metrics.csv](eval/metrics.csv)\n\n";
  md << "| model | subset |";
  for (auto sp : kAllSplits) md << " " << to_string(sp) << " |";
  md << "\n|---|---|";
  for (std::size_t i = 0; i < std::size(kAllSplits); ++i) md << "---|";
  md << "\n";
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>> table;
  for (const auto& c : grid) {
    if (c.at("segment") != "all") continue;
    const auto& auc = c.at("metrics").at("auc");
    std::string v = auc.is_null() ? "n/a" : fmt_short(auc.get<double>());
    if (c.value("best_auc", false)) v = "**" + v + "**";
    table[{c.at("model").get<std::string>(), c.at("subset").get<std::string>()}][c.at("split").get<std::string>()] = v;
  }
  for (const auto& [key, cells] : table) {
    md << "| " << key.first << " | " << key.second << " |";
    for (auto sp : kAllSplits) {
      auto it = cells.find(to_string(sp));
      md << " " << (it == cells.end() ? "" : it->second) << " |";
    }
    md << "\n";
  }
  md << "\nSegment-level AUC and weighted Brier scores: [eval/metrics.json](eval/metrics.json).\n";
  md << "Rank correlations between models: [eval/correlations.json](eval/correlations.json).\n\n";

  md << "## AUC by minimum word count\n\n";
  md << "Curves per text-bearing model and split: [eval/wordcount_curves.json](eval/wordcount_curves.json)";
  md << " (delimited copies under `eval/wordcount/`).\n\n";

  md << "## Permutation importance shift (combined minus structured)\n\n";
  md << "Source: [explain/importance_shift.json](explain/importance_shift.json)\n\n";
  md << "| feature | structured | combined | delta |\n|---|---|---|---|\n";
  for (const auto& e : read_json(ex_dir / "importance_shift.json")) {
    md << "| " << e.at("feature").get<std::string>() << " | " << fmt_short(e.at("baseline").get<double>()) << " | "
       << fmt_short(e.at("combined").get<double>()) << " | " << fmt_short(e.at("delta").get<double>()) << " |\n";
  }

  json cases = read_json(ex_dir / "uncertain_cases.json");
  md << "\n## Uncertain cases improved by text\n\n";
  md << cases.at("cases").size() << " cases selected: [explain/uncertain_cases.json](explain/uncertain_cases.json);";
  md << " word weights per case: [explain/lime.json](explain/lime.json).\n\n";

  md << "## Top words by mean impact\n\n";
  md << "Source: [explain/top_words.csv](explain/top_words.csv)\n\n";
  md << "| rank | stem | mean impact | documents |\n|---|---|---|---|\n";
  auto rows = csv::parse(read_text(ex_dir / "top_words.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 4) continue;
    md << "| " << rows[i][0] << " | " << rows[i][1] << " | " << fmt_short(std::stod(rows[i][2])) << " | "
       << rows[i][3] << " |\n";
  }
  write_text(config.out / layout::kReport, md.str());
  timer.finish();
}

void cmd_run(const RunConfig& config) {
  cmd_synth(config);
  cmd_prep(config);
  cmd_train(config);
  cmd_evaluate(config);
  cmd_explain(config);
  cmd_report(config);
}

}  // namespace lendtext::pipeline
