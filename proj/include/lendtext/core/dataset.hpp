#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lendtext {

enum class Segment { New, Existing };

std::string to_string(Segment s);
Segment parse_segment(const std::string& s);

// Column layout of a loan file. Which columns are continuous/categorical is a
// property of the dataset, not of the code.
struct FeatureSchema {
  std::vector<std::string> continuous_names;
  std::vector<std::string> categorical_names;
  std::string text_field = "text";
  std::string label_field = "default";
  std::string segment_field = "segment";
  std::string cohort_field = "cohort";
  std::string id_field = "id";

  // Throws SchemaError on overlapping or empty names.
  void validate() const;
  std::size_t n_features() const { return continuous_names.size() + categorical_names.size(); }
  // Continuous names followed by categorical names.
  std::vector<std::string> feature_names() const;
};

struct LoanRecord {
  std::int64_t id = 0;
  std::vector<double> continuous;
  std::vector<std::string> categorical;
  std::string text;
  int label = 0;  // 1 = 90+ days past due within the observation window
  Segment segment = Segment::New;
  int cohort = 0;
};

struct Dataset {
  FeatureSchema schema;
  std::vector<LoanRecord> records;

  std::size_t size() const { return records.size(); }
  // Throws ValidationError on duplicate ids, bad labels or shape mismatch.
  void validate() const;
};

// RFC 4180 CSV with a header row. Column order on write: id, continuous...,
// categorical..., segment, cohort, label, text.
Dataset load_dataset(const std::filesystem::path& path, const FeatureSchema& schema);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
std::string serialize_dataset(const Dataset& dataset);
Dataset parse_dataset(const std::string& content, const FeatureSchema& schema);

// Infers a schema from a file header: columns other than the reserved fields
// are continuous unless listed in `categorical`.
FeatureSchema schema_from_header(const std::filesystem::path& path,
                                 const std::vector<std::string>& categorical);

}  // namespace lendtext
