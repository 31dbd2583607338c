#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lendtext/core/error.hpp"
#include "lendtext/pipeline/config.hpp"
#include "lendtext/pipeline/stages.hpp"

using namespace lendtext;
using namespace lendtext::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("lendtext-test-" + name);
  fs::remove_all(p);
  return p;
}

// Small enough for every stage to finish in seconds.
RunConfig tiny_config(const fs::path& out) {
  RunConfig c = parse_config(R"(
[run]
seed = 3
[synth]
n_records = 400
[text]
min_df = 0.02
max_df = 0.4
k_max = 20
max_length = 32
[lr]
l1_ratios = 0, 1
n_lambda = 4
folds = 3
[rf]
max_depth = 3
max_features_fraction = 0.3
n_candidates = 1
folds = 3
n_trees = 10
[rfecv]
folds = 3
n_trees = 10
max_depth = 3
[dl]
hidden = 8
structured_epochs = 2
blocks = 1
heads = 2
model_dim = 8
ff_dim = 16
text_head_hidden = 4
pretrain_epochs = 1
finetune_epochs = 1
fusion_units = 4
phase1_epochs = 1
phase2_epochs = 1
[explain]
repeats = 2
top_n = 3
lime_samples = 30
)");
  c.out = out;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, DefaultsValidateAndHashIsStable) {
  RunConfig a, b;
  EXPECT_NO_THROW(a.validate());
  EXPECT_EQ(a.hash(), b.hash());
  b.set_seed(8);
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(a.to_json().at("run").at("version"), kConfigVersion);
}

TEST(Config, ReportsEveryViolationTogether) {
  try {
    parse_config("[text]\nmin_df = 0.5\nmax_df = 0.1\nbogus = 1\n[lr]\nfolds = many\n[dl]\nheads = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("bogus"), std::string::npos) << msg;
    EXPECT_NE(msg.find("folds"), std::string::npos) << msg;
    EXPECT_NE(msg.find("min_df"), std::string::npos) << msg;
    EXPECT_NE(msg.find("heads"), std::string::npos) << msg;
  }
}

TEST(Config, IniValuesOverrideDefaults) {
  auto c = parse_config("[run]\nseed = 42\n[synth]\nn_records = 123\n[rf]\nmax_depth = 2, 4\n");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.synth.n_records, 123u);
  EXPECT_EQ(c.rf.max_depth, (std::vector<int>{2, 4}));
}

TEST(Stages, EvaluateBeforeTrainNamesTrain) {
  auto c = tiny_config(fresh_dir("dependency"));
  cmd_synth(c);
  cmd_prep(c);
  try {
    cmd_evaluate(c);
    FAIL();
  } catch (const DependencyError& e) {
    EXPECT_NE(std::string(e.what()).find("train"), std::string::npos) << e.what();
  }
  fs::remove_all(c.out);
}

TEST(Stages, PrepBeforeSynthIsDependencyError) {
  auto c = tiny_config(fresh_dir("no-data"));
  EXPECT_THROW(cmd_prep(c), DependencyError);
  fs::remove_all(c.out);
}

TEST(Stages, LockIsExclusive) {
  auto dir = fresh_dir("lock");
  {
    DirectoryLock lock(dir);
    EXPECT_THROW(DirectoryLock second(dir), Error);
  }
  EXPECT_NO_THROW(DirectoryLock again(dir));
  fs::remove_all(dir);
}

TEST(Stages, FullRunEmitsNineModelsAndIsIdempotent) {
  auto c = tiny_config(fresh_dir("full"));
  cmd_run(c);
  int models = 0;
  for (const auto& e : fs::directory_iterator(c.out / layout::kModelDir)) models += e.path().extension() == ".json";
  EXPECT_EQ(models, 9);
  EXPECT_TRUE(fs::exists(c.out / layout::kReport));

  auto manifest = nlohmann::json::parse(slurp(c.out / layout::kManifest));
  EXPECT_EQ(manifest.at("config_hash"), c.hash());
  EXPECT_EQ(manifest.at("library_version"), library_version());
  EXPECT_FALSE(manifest.at("artifacts").empty());

  std::string before = slurp(c.out / layout::kManifest);
  cmd_run(c);
  EXPECT_EQ(slurp(c.out / layout::kManifest), before);

  // A model loaded back predicts exactly what evaluate wrote.
  auto p = load_prepared(c);
  auto m = load_model(c, ModelKind::LR, Subset::Combined);
  auto set = prediction_set(p, m, SplitName::Holdout);
  auto written = eval::PredictionSet::from_csv(slurp(c.out / layout::kEvalDir / "predictions" / "lr_combined_holdout_all.csv"),
                                               "lr", "combined", "holdout");
  EXPECT_EQ(written.ids, set.ids);
  ASSERT_EQ(written.scores.size(), set.scores.size());
  for (std::size_t i = 0; i < set.size(); ++i) EXPECT_NEAR(written.scores[i], set.scores[i], 1e-12);
  fs::remove_all(c.out);
}
