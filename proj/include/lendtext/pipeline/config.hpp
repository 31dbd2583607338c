#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lendtext/baselines/elastic_net.hpp"
#include "lendtext/baselines/forest.hpp"
#include "lendtext/baselines/rfecv.hpp"
#include "lendtext/core/synth.hpp"

namespace lendtext::pipeline {

inline constexpr int kConfigVersion = 1;

struct TextSettings {
  double min_df = 0.05;
  double max_df = 0.10;
  double variance_target = 0.94;
  std::size_t k_max = 250;
  std::size_t k_override = 0;  // 0: choose by variance target
  std::size_t token_min_count = 2;
  std::size_t max_length = 128;
};

struct DlSettings {
  std::vector<int> hidden = {64, 32};
  double structured_lr = 1e-3;
  int structured_epochs = 30;
  int structured_batch = 64;

  int blocks = 2;
  int heads = 4;
  int model_dim = 64;
  int ff_dim = 128;
  int text_head_hidden = 32;

  double mask_prob = 0.15;
  int pretrain_epochs = 3;
  double pretrain_lr = 1e-3;
  int finetune_k = 1;
  int finetune_epochs = 3;
  double finetune_lr = 5e-4;
  int text_batch = 32;

  int fusion_units = 64;
  double phase1_lr = 1e-3;
  int phase1_epochs = 8;
  double phase2_lr = 1e-4;
  int phase2_epochs = 2;
  int fusion_batch = 64;
};

struct ExplainSettings {
  std::string split = "holdout";
  int repeats = 10;
  double band_lo = 0.40;
  double band_hi = 0.60;
  std::size_t top_n = 250;
  int lime_samples = 1000;
  double kernel_width = 0.75;
  std::size_t top_k = 20;
};

struct RunConfig {
  int version = kConfigVersion;
  std::uint64_t seed = 7;
  std::filesystem::path out = "artifacts";
  std::filesystem::path data;  // empty: generate synthetic data
  int threads = 1;

  synth::SynthConfig synth;
  double holdout_ratio = 0.2;
  TextSettings text;

  baselines::ElasticNetSearch lr;
  baselines::ForestSearch rf;
  bool rfecv_enabled = true;
  baselines::RfecvOptions rfecv;
  DlSettings dl;
  ExplainSettings explain;

  // Sets the global seed and re-derives every stage seed from it.
  void set_seed(std::uint64_t seed);
  // Throws ConfigError listing every violation.
  void validate() const;
  // Canonical dump; hashing it gives the config hash.
  nlohmann::json to_json() const;
  std::string hash() const;
};

// INI file with [run], [synth], [split], [text], [lr], [rf], [rfecv], [dl],
// [explain] sections. Unknown keys and malformed values are collected and
// reported together as one ConfigError.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& content);

}  // namespace lendtext::pipeline
