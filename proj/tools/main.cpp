#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lendtext/core/error.hpp"
#include "lendtext/pipeline/config.hpp"
#include "lendtext/pipeline/stages.hpp"

using namespace lendtext;
using namespace lendtext::pipeline;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string model;
  std::string subset;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Flags& f, bool selection) {
  cmd->add_option("--config", f.config, "INI run configuration");
  cmd->add_option("--seed", f.seed, "Global seed override");
  cmd->add_option("--out", f.out, "Artifact directory override");
  cmd->add_option("--threads", f.threads, "Worker threads for forest training");
  if (selection) {
    cmd->add_option("--model", f.model, "lr | rf | dl (default: all)");
    cmd->add_option("--subset", f.subset, "text | structured | combined (default: all)");
  }
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) {
    c = load_config(f.config);
  } else if (!f.seed) {
    throw ConfigError("a seed is required: pass --config with run.seed or --seed");
  }
  if (!f.out.empty()) c.out = f.out;
  if (f.threads) c.threads = *f.threads;
  c.set_seed(f.seed ? *f.seed : c.seed);
  c.validate();
  return c;
}

Selection selection(const Flags& f) {
  Selection s;
  if (!f.model.empty()) s.model = parse_model(f.model);
  if (!f.subset.empty()) s.subset = parse_subset(f.subset);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Default prediction from loan-officer text: data, training, evaluation and explanations"};
  app.require_subcommand(1);
  Flags flags;
  auto* synth = app.add_subcommand("synth", "Generate (or import) the loan dataset");
  auto* prep = app.add_subcommand("prep", "Fit the split, scaler, codec, vocabularies and LSA");
  auto* train = app.add_subcommand("train", "Train model/subset combinations");
  auto* evaluate = app.add_subcommand("evaluate", "Write predictions, metric grid and word-count curves");
  auto* explain = app.add_subcommand("explain", "Permutation importance, uncertain cases and LIME");
  auto* report = app.add_subcommand("report", "Assemble report.md");
  auto* run = app.add_subcommand("run", "Every stage in order");
  for (auto* cmd : {synth, prep, explain, report, run}) add_common(cmd, flags, false);
  for (auto* cmd : {train, evaluate}) add_common(cmd, flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig config = resolve(flags);
    Selection sel = selection(flags);
    DirectoryLock lock(config.out);
    if (synth->parsed()) cmd_synth(config);
    else if (prep->parsed()) cmd_prep(config);
    else if (train->parsed()) cmd_train(config, sel);
    else if (evaluate->parsed()) cmd_evaluate(config, sel);
    else if (explain->parsed()) cmd_explain(config);
    else if (report->parsed()) cmd_report(config);
    else if (run->parsed()) cmd_run(config);
    return 0;
  } catch (const DependencyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
