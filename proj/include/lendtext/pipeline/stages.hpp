#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lendtext/pipeline/config.hpp"
#include "lendtext/pipeline/experiment.hpp"

namespace lendtext::pipeline {

std::string library_version();

// Artifact directory layout, relative to RunConfig::out.
namespace layout {
inline constexpr const char* kDataset = "data/loans.csv";
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kPrepDir = "prep";
inline constexpr const char* kModelDir = "models";
inline constexpr const char* kEvalDir = "eval";
inline constexpr const char* kExplainDir = "explain";
inline constexpr const char* kReport = "report.md";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kTimings = "timings.json";
inline constexpr const char* kLock = ".lock";
std::filesystem::path model_file(ModelKind m, Subset s);
}  // namespace layout

// Restricts train/evaluate to one model family and/or subset.
struct Selection {
  std::optional<ModelKind> model;
  std::optional<Subset> subset;
  bool matches(ModelKind m, Subset s) const;
};

// Exclusive ownership of an artifact directory for the lifetime of the object.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& out);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

void cmd_synth(const RunConfig& config);
void cmd_prep(const RunConfig& config);
void cmd_train(const RunConfig& config, const Selection& selection = {});
void cmd_evaluate(const RunConfig& config, const Selection& selection = {});
void cmd_explain(const RunConfig& config);
void cmd_report(const RunConfig& config);
// Every stage in order.
void cmd_run(const RunConfig& config);

// Loads the fitted preprocessing written by cmd_prep.
Prepared load_prepared(const RunConfig& config);
AnyModel load_model(const RunConfig& config, ModelKind m, Subset s);

// Config hash, library version and sorted (path, sha256, bytes) over every
// artifact except the manifest, timings and lock files. Rewritten by each command.
nlohmann::json build_manifest(const RunConfig& config);
void write_manifest(const RunConfig& config);

}  // namespace lendtext::pipeline
