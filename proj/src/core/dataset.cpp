#include "lendtext/core/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lendtext/core/csv.hpp"
#include "lendtext/core/error.hpp"

namespace lendtext {

std::string to_string(Segment s) { return s == Segment::New ? "new" : "existing"; }

Segment parse_segment(const std::string& s) {
  if (s == "new") return Segment::New;
  if (s == "existing") return Segment::Existing;
  throw ValidationError("unknown segment '" + s + "' (expected new|existing)");
}

void FeatureSchema::validate() const {
  std::set<std::string> seen;
  auto add = [&](const std::string& name, const char* what) {
    if (name.empty()) throw SchemaError(std::string("empty ") + what + " name");
    if (!seen.insert(name).second) throw SchemaError("column '" + name + "' declared twice");
  };
  for (const auto& n : continuous_names) add(n, "continuous feature");
  for (const auto& n : categorical_names) add(n, "categorical feature");
  add(text_field, "text field");
  add(label_field, "label field");
  add(segment_field, "segment field");
  add(cohort_field, "cohort field");
  add(id_field, "id field");
  if (n_features() == 0) throw SchemaError("schema declares no features");
}

std::vector<std::string> FeatureSchema::feature_names() const {
  std::vector<std::string> names = continuous_names;
  names.insert(names.end(), categorical_names.begin(), categorical_names.end());
  return names;
}

void Dataset::validate() const {
  schema.validate();
  std::unordered_set<std::int64_t> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) {
      throw ValidationError("duplicate record id " + std::to_string(r.id));
    }
    if (r.label != 0 && r.label != 1) {
      throw ValidationError("record " + std::to_string(r.id) + ": label must be 0 or 1");
    }
    if (r.continuous.size() != schema.continuous_names.size() ||
        r.categorical.size() != schema.categorical_names.size()) {
      throw ValidationError("record " + std::to_string(r.id) + " does not match schema");
    }
  }
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(const std::string& s, const std::string& column, std::size_t row) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("row " + std::to_string(row) + ": column '" + column +
                          "' is not a number: '" + s + "'");
  }
  return value;
}

}  // namespace

std::string serialize_dataset(const Dataset& dataset) {
  const auto& sc = dataset.schema;
  csv::Row header{sc.id_field};
  header.insert(header.end(), sc.continuous_names.begin(), sc.continuous_names.end());
  header.insert(header.end(), sc.categorical_names.begin(), sc.categorical_names.end());
  header.push_back(sc.segment_field);
  header.push_back(sc.cohort_field);
  header.push_back(sc.label_field);
  header.push_back(sc.text_field);

  std::string out = csv::format_row(header);
  for (const auto& r : dataset.records) {
    csv::Row row{std::to_string(r.id)};
    for (double v : r.continuous) row.push_back(format_double(v));
    row.insert(row.end(), r.categorical.begin(), r.categorical.end());
    row.push_back(to_string(r.segment));
    row.push_back(std::to_string(r.cohort));
    row.push_back(std::to_string(r.label));
    row.push_back(r.text);
    out += csv::format_row(row);
  }
  return out;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_dataset(dataset);
}

Dataset parse_dataset(const std::string& content, const FeatureSchema& schema) {
  schema.validate();
  auto rows = csv::parse(content);
  if (rows.empty()) throw SchemaError("record file has no header");
  const auto& header = rows.front();
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  auto require = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw SchemaError("missing column '" + name + "'");
    return it->second;
  };
  std::size_t id_col = require(schema.id_field);
  std::vector<std::size_t> cont_cols, cat_cols;
  for (const auto& n : schema.continuous_names) cont_cols.push_back(require(n));
  for (const auto& n : schema.categorical_names) cat_cols.push_back(require(n));
  std::size_t text_col = require(schema.text_field);
  std::size_t label_col = require(schema.label_field);
  std::size_t seg_col = require(schema.segment_field);
  std::size_t cohort_col = require(schema.cohort_field);

  Dataset ds;
  ds.schema = schema;
  std::unordered_set<std::int64_t> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) {
      throw ValidationError("row " + std::to_string(r) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(row.size()));
    }
    LoanRecord rec;
    rec.id = parse_number<std::int64_t>(row[id_col], schema.id_field, r);
    const std::string& label = row[label_col];
    if (label != "0" && label != "1") {
      throw ValidationError("record " + std::to_string(rec.id) + ": label '" + label +
                            "' is not binary");
    }
    rec.label = label == "1" ? 1 : 0;
    for (std::size_t c = 0; c < cont_cols.size(); ++c) {
      rec.continuous.push_back(
          parse_number<double>(row[cont_cols[c]], schema.continuous_names[c], r));
    }
    for (std::size_t c : cat_cols) rec.categorical.push_back(row[c]);
    rec.text = row[text_col];
    rec.segment = parse_segment(row[seg_col]);
    rec.cohort = parse_number<int>(row[cohort_col], schema.cohort_field, r);
    if (!ids.insert(rec.id).second) {
      throw ValidationError("duplicate record id " + std::to_string(rec.id));
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open record file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), schema);
}

FeatureSchema schema_from_header(const std::filesystem::path& path,
                                 const std::vector<std::string>& categorical) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open record file " + path.string());
  std::string line;
  std::getline(in, line);
  auto rows = csv::parse(line);
  if (rows.empty()) throw SchemaError("record file has no header");
  FeatureSchema schema;
  std::set<std::string> cats(categorical.begin(), categorical.end());
  for (const auto& name : rows.front()) {
    if (name == schema.id_field || name == schema.text_field || name == schema.label_field ||
        name == schema.segment_field || name == schema.cohort_field) {
      continue;
    }
    if (cats.count(name)) {
      schema.categorical_names.push_back(name);
    } else {
      schema.continuous_names.push_back(name);
    }
  }
  return schema;
}

}  // namespace lendtext
