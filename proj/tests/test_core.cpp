#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "lendtext/core/csv.hpp"
#include "lendtext/core/dataset.hpp"
#include "lendtext/core/error.hpp"
#include "lendtext/core/hash.hpp"
#include "lendtext/core/preprocess.hpp"
#include "lendtext/core/rng.hpp"
#include "lendtext/core/split.hpp"
#include "lendtext/core/synth.hpp"

using namespace lendtext;

namespace {

FeatureSchema tiny_schema() {
  FeatureSchema s;
  s.continuous_names = {"revenue"};
  s.categorical_names = {"industry"};
  return s;
}

const char* kTinyCsv =
    "id,revenue,industry,segment,cohort,default,text\n"
    "10,1.5,retail,new,2010,0,\"short, note\"\n"
    "11,2.5,farm,existing,2011,1,\"a \"\"quoted\"\" word\"\n"
    "12,0.5,retail,new,2012,0,plain\n";

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> v(d.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST(Csv, QuotedFieldsRoundTrip) {
  auto rows = csv::parse("a,\"b,c\",\"say \"\"hi\"\"\"\n\"multi\nline\",x,y\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], "b,c");
  EXPECT_EQ(rows[0][2], "say \"hi\"");
  EXPECT_EQ(rows[1][0], "multi\nline");
  EXPECT_EQ(csv::parse(csv::format_row(rows[0]))[0], rows[0]);
  EXPECT_THROW(csv::parse("\"open"), ValidationError);
}

TEST(Dataset, ParsesThreeRowsAndKeepsIds) {
  auto d = parse_dataset(kTinyCsv, tiny_schema());
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.records[0].id, 10);
  EXPECT_EQ(d.records[2].id, 12);
  EXPECT_EQ(d.records[1].text, "a \"quoted\" word");
  EXPECT_EQ(d.records[1].segment, Segment::Existing);
  EXPECT_EQ(d.records[1].label, 1);
}

TEST(Dataset, MissingTextColumnNamesField) {
  std::string bad = "id,revenue,industry,segment,cohort,default\n1,1,retail,new,2010,0\n";
  try {
    parse_dataset(bad, tiny_schema());
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("text"), std::string::npos);
  }
}

TEST(Dataset, BadLabelCitesRow) {
  std::string bad = "id,revenue,industry,segment,cohort,default,text\n1,1,retail,new,2010,0,a\n2,1,farm,new,2010,2,b\n";
  try {
    parse_dataset(bad, tiny_schema());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

TEST(Dataset, SerializeRoundTrip) {
  auto d = parse_dataset(kTinyCsv, tiny_schema());
  auto again = parse_dataset(serialize_dataset(d), tiny_schema());
  ASSERT_EQ(again.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(again.records[i].id, d.records[i].id);
    EXPECT_EQ(again.records[i].text, d.records[i].text);
    EXPECT_EQ(again.records[i].continuous, d.records[i].continuous);
  }
}

TEST(Scaler, MidpointConstantAndClipping) {
  ScalerParams p;
  p.min = {0.0, 3.0};
  p.max = {10.0, 3.0};
  EXPECT_DOUBLE_EQ(p.scale(0, 5.0), 0.5);
  EXPECT_DOUBLE_EQ(p.scale(0, 15.0), 1.0);
  EXPECT_DOUBLE_EQ(p.scale(0, -1.0), 0.0);
  EXPECT_DOUBLE_EQ(p.scale(1, 42.0), 0.0);
  auto back = ScalerParams::from_json(p.to_json());
  EXPECT_EQ(back.min, p.min);
  EXPECT_EQ(back.max, p.max);
}

TEST(Scaler, FitsOnGivenRowsOnly) {
  auto d = parse_dataset(kTinyCsv, tiny_schema());
  auto p = fit_scaler(d, std::vector<std::size_t>{0, 2});
  EXPECT_DOUBLE_EQ(p.min[0], 0.5);
  EXPECT_DOUBLE_EQ(p.max[0], 1.5);
}

TEST(Codec, FirstOccurrenceOrderAndUnknown) {
  CategoryCodec c(std::vector<std::vector<std::string>>{{"a", "b"}});
  EXPECT_EQ(c.encode(0, "a"), 1);
  EXPECT_EQ(c.encode(0, "b"), 2);
  EXPECT_EQ(c.encode(0, "c"), CategoryCodec::kUnknown);
  EXPECT_EQ(c.encode(0, "a"), c.encode(0, "a"));

  auto d = parse_dataset(kTinyCsv, tiny_schema());
  auto fitted = fit_codec(d, all_rows(d));
  EXPECT_EQ(fitted.encode(0, "retail"), 1);
  EXPECT_EQ(fitted.encode(0, "farm"), 2);
  EXPECT_EQ(fitted.cardinality(0), 2u);
  auto back = CategoryCodec::from_json(fitted.to_json());
  EXPECT_EQ(back.encode(0, "farm"), 2);
}

TEST(Split, DeterministicAndCohortBased) {
  synth::SynthConfig cfg;
  cfg.n_records = 600;
  auto d = synth::generate_synthetic(cfg);
  auto a = split_dataset(d, 0.2, 5);
  auto b = split_dataset(d, 0.2, 5);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.holdout, b.holdout);
  for (auto r : a.oot_early) EXPECT_EQ(d.records[r].cohort, cfg.first_cohort);
  for (auto r : a.oot_late) EXPECT_EQ(d.records[r].cohort, cfg.last_cohort);
  EXPECT_EQ(a.train.size() + a.holdout.size() + a.oot_early.size() + a.oot_late.size(), d.size());

  auto none = split_dataset(d, 0.0, 5);
  EXPECT_TRUE(none.holdout.empty());
  EXPECT_EQ(none.train.size(), a.train.size() + a.holdout.size());
}

TEST(Synth, DefaultRateWithinBinomialBand) {
  synth::SynthConfig cfg;
  cfg.n_records = 1000;
  cfg.default_rate_new = 0.2;
  cfg.default_rate_existing = 0.2;
  auto d = synth::generate_synthetic(cfg);
  double rate = 0;
  for (const auto& r : d.records) rate += r.label;
  rate /= static_cast<double>(d.size());
  EXPECT_NEAR(rate, 0.2, 0.03);
}

TEST(Synth, FullOverlapKeywordsFollowStructuredFeatures) {
  synth::SynthConfig cfg;
  cfg.n_records = 300;
  cfg.overlap = 1.0;
  auto a = synth::generate_synthetic(cfg);
  cfg.text_seed = 999;  // only the text-specific randomness changes
  auto b = synth::generate_synthetic(cfg);
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    same += synth::keyword_profile(a.records[i].text) == synth::keyword_profile(b.records[i].text);
  EXPECT_EQ(same, a.size());
}

TEST(Synth, DriftShortensLateCohort) {
  synth::SynthConfig cfg;
  cfg.n_records = 2000;
  cfg.drift = true;
  auto d = synth::generate_synthetic(cfg);
  double late = 0, core = 0;
  std::size_t nl = 0, nc = 0;
  for (const auto& r : d.records) {
    double w = static_cast<double>(synth::word_count(r.text));
    if (r.cohort == cfg.last_cohort) {
      late += w;
      ++nl;
    } else if (r.cohort != cfg.first_cohort) {
      core += w;
      ++nc;
    }
  }
  EXPECT_LT(late / nl, 0.5 * core / nc);
}

TEST(Synth, SameSeedSameBytes) {
  synth::SynthConfig cfg;
  cfg.n_records = 200;
  EXPECT_EQ(serialize_dataset(synth::generate_synthetic(cfg)), serialize_dataset(synth::generate_synthetic(cfg)));
}

TEST(Synth, InvalidConfigListsEveryViolation) {
  synth::SynthConfig cfg;
  cfg.n_records = 0;
  cfg.overlap = 2.0;
  try {
    cfg.validate();
    FAIL();
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("n_records"), std::string::npos);
    EXPECT_NE(msg.find("overlap"), std::string::npos);
  }
}

TEST(Hash, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Rng, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_NE(derive_seed(1, std::uint64_t{0}), derive_seed(1, std::uint64_t{1}));
  EXPECT_EQ(derive_seed(3, "x"), derive_seed(3, "x"));
}
