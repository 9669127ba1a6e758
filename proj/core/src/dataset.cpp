#include "ctrex/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "csv.hpp"

namespace ctrex {

namespace {

constexpr int kSchemaVersion = 1;

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string("cannot open ") + what + " '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::optional<double> parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string location(std::size_t row, std::size_t line, const std::string& column) {
  return "row " + std::to_string(row) + " (line " + std::to_string(line) + "), column '" +
         column + "'";
}

}  // namespace

std::string to_string(FeatureKind kind) {
  return kind == FeatureKind::kNumeric ? "numeric" : "categorical";
}

std::string to_string(Mutability mutability) {
  switch (mutability) {
    case Mutability::kMutable:
      return "mutable";
    case Mutability::kImmutable:
      return "immutable";
    case Mutability::kSemiImmutable:
      return "semi-immutable";
  }
  return "unknown";
}

std::string to_string(Direction direction) {
  switch (direction) {
    case Direction::kNone:
      return "none";
    case Direction::kIncreaseOnly:
      return "increase-only";
    case Direction::kDecreaseOnly:
      return "decrease-only";
  }
  return "unknown";
}

Mutability parse_mutability(const std::string& text) {
  if (text == "mutable") return Mutability::kMutable;
  if (text == "immutable") return Mutability::kImmutable;
  if (text == "semi-immutable") return Mutability::kSemiImmutable;
  throw DataError("unknown mutability '" + text +
                  "' (expected mutable, immutable or semi-immutable)");
}

Direction parse_direction(const std::string& text) {
  if (text == "increase-only") return Direction::kIncreaseOnly;
  if (text == "decrease-only") return Direction::kDecreaseOnly;
  throw DataError("unknown direction '" + text + "' (expected increase-only or decrease-only)");
}

bool FeatureSchema::change_allowed(double from, double to) const {
  if (from == to) return true;
  switch (mutability) {
    case Mutability::kMutable:
      return true;
    case Mutability::kImmutable:
      return false;
    case Mutability::kSemiImmutable:
      return direction == Direction::kIncreaseOnly ? to > from : to < from;
  }
  return false;
}

void FeatureSchema::validate() const {
  const std::string where = "feature '" + name + "': ";
  if (name.empty()) throw DataError("feature with empty name");
  if (!(edit_cost > 0.0) || !std::isfinite(edit_cost)) {
    throw DataError(where + "edit_cost must be a positive finite number");
  }
  if (observed_min > observed_max) throw DataError(where + "observed_min > observed_max");
  if (sigma < 0.0) throw DataError(where + "negative sigma");
  if (categorical()) {
    if (categories.size() < 2) throw DataError(where + "categorical needs at least 2 categories");
    std::set<std::string> unique(categories.begin(), categories.end());
    if (unique.size() != categories.size()) throw DataError(where + "duplicate category");
    if (mutability == Mutability::kSemiImmutable || direction != Direction::kNone) {
      throw DataError(where + "categorical features cannot carry a direction");
    }
  } else if (!categories.empty()) {
    throw DataError(where + "numeric feature declares categories");
  }
  if (mutability == Mutability::kSemiImmutable && direction == Direction::kNone) {
    throw DataError(where + "semi-immutable feature needs a direction");
  }
  if (mutability != Mutability::kSemiImmutable && direction != Direction::kNone) {
    throw DataError(where + "direction is only valid for semi-immutable features");
  }
}

std::optional<std::size_t> find_feature(const Schema& schema, std::string_view name) {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].name == name) return i;
  }
  return std::nullopt;
}

void check_conforms(const Schema& schema, const Instance& x) {
  if (x.size() != schema.size()) {
    throw DataError("instance has " + std::to_string(x.size()) + " values, schema has " +
                    std::to_string(schema.size()) + " features");
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const double v = x[i];
    if (!std::isfinite(v)) throw DataError("feature '" + schema[i].name + "': non-finite value");
    if (schema[i].categorical()) {
      if (v < 0 || v != std::floor(v) || v >= static_cast<double>(schema[i].categories.size())) {
        throw DataError("feature '" + schema[i].name + "': category index out of range");
      }
    }
  }
}

// --- Encoder -----------------------------------------------------------------

Encoder::Encoder(Schema schema, Normalization normalization)
    : schema_(std::move(schema)), normalization_(std::move(normalization)) {
  if (normalization_.mean.size() != schema_.size() ||
      normalization_.stddev.size() != schema_.size()) {
    throw DataError("normalization does not match schema length");
  }
  offsets_.reserve(schema_.size());
  for (const auto& f : schema_) {
    offsets_.push_back(width_);
    width_ += f.categorical() ? f.categories.size() : 1;
  }
}

std::vector<bool> Encoder::binary_mask() const {
  std::vector<bool> mask(width_, false);
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (!schema_[i].categorical()) continue;
    for (std::size_t c = 0; c < schema_[i].categories.size(); ++c) mask[offsets_[i] + c] = true;
  }
  return mask;
}

std::vector<double> Encoder::encode(const Instance& x) const {
  std::vector<double> out(width_);
  encode_into(x, out);
  return out;
}

void Encoder::encode_into(const Instance& x, std::span<double> out) const {
  if (x.size() != schema_.size()) throw DataError("instance does not match encoder schema");
  if (out.size() != width_) throw DataError("encode buffer has wrong width");
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    const auto& f = schema_[i];
    if (f.categorical()) {
      const auto n = f.categories.size();
      const auto idx = static_cast<std::size_t>(x[i]);
      if (x[i] < 0 || idx >= n) throw DataError("feature '" + f.name + "': category index out of range");
      for (std::size_t c = 0; c < n; ++c) out[offsets_[i] + c] = c == idx ? 1.0 : 0.0;
    } else {
      out[offsets_[i]] = (x[i] - normalization_.mean[i]) / normalization_.stddev[i];
    }
  }
}

Instance Encoder::normalize(const Instance& x) const {
  if (x.size() != schema_.size()) throw DataError("instance does not match encoder schema");
  Instance out = x;
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].numeric()) {
      out[i] = (x[i] - normalization_.mean[i]) / normalization_.stddev[i];
    }
  }
  return out;
}

Instance Encoder::denormalize(const Instance& x) const {
  if (x.size() != schema_.size()) throw DataError("instance does not match encoder schema");
  Instance out = x;
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].numeric()) {
      out[i] = x[i] * normalization_.stddev[i] + normalization_.mean[i];
    }
  }
  return out;
}

nlohmann::json Encoder::to_json() const {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    const auto& f = schema_[i];
    nlohmann::json entry = {{"name", f.name},
                            {"kind", to_string(f.kind)},
                            {"mean", normalization_.mean[i]},
                            {"std", normalization_.stddev[i]}};
    if (f.categorical()) entry["categories"] = f.categories;
    features.push_back(std::move(entry));
  }
  return {{"features", std::move(features)}};
}

Encoder Encoder::from_json(const nlohmann::json& doc) {
  Schema schema;
  Normalization norm;
  for (const auto& entry : doc.at("features")) {
    FeatureSchema f;
    f.name = entry.at("name").get<std::string>();
    f.kind = entry.at("kind").get<std::string>() == "categorical" ? FeatureKind::kCategorical
                                                                  : FeatureKind::kNumeric;
    if (entry.contains("categories")) {
      f.categories = entry.at("categories").get<std::vector<std::string>>();
    }
    norm.mean.push_back(entry.at("mean").get<double>());
    norm.stddev.push_back(entry.at("std").get<double>());
    schema.push_back(std::move(f));
  }
  return Encoder(std::move(schema), std::move(norm));
}

std::vector<double> one_hot(std::size_t index, std::size_t category_count) {
  if (index >= category_count) throw DataError("one_hot: index out of range");
  std::vector<double> out(category_count, 0.0);
  out[index] = 1.0;
  return out;
}

// --- Dataset -----------------------------------------------------------------

Dataset::Dataset(Schema schema, std::vector<Instance> rows,
                 std::optional<std::vector<int>> labels, std::vector<std::string> class_names)
    : schema_(std::move(schema)),
      rows_(std::move(rows)),
      labels_(std::move(labels)),
      class_names_(std::move(class_names)) {
  if (rows_.empty()) throw DataError("dataset has no rows");
  if (labels_ && labels_->size() != rows_.size()) {
    throw DataError("label count does not match row count");
  }
  for (auto& f : schema_) {
    f.observed_min = f.observed_max = f.sigma = 0.0;
    f.validate();
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    try {
      check_conforms(schema_, rows_[r]);
    } catch (const DataError& e) {
      throw DataError("row " + std::to_string(r) + ": " + e.what());
    }
  }
  if (labels_) {
    for (int y : *labels_) {
      if (y < 0 || (!class_names_.empty() && static_cast<std::size_t>(y) >= class_names_.size())) {
        throw DataError("label out of range: " + std::to_string(y));
      }
    }
  }
  compute_statistics();
}

void Dataset::compute_statistics() {
  const std::size_t n = rows_.size();
  normalization_.mean.assign(schema_.size(), 0.0);
  normalization_.stddev.assign(schema_.size(), 1.0);
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    auto& f = schema_[i];
    double lo = rows_[0][i], hi = rows_[0][i], sum = 0.0;
    for (const auto& row : rows_) {
      lo = std::min(lo, row[i]);
      hi = std::max(hi, row[i]);
      sum += row[i];
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& row : rows_) ss += (row[i] - mean) * (row[i] - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(n));
    f.observed_min = lo;
    f.observed_max = hi;
    f.sigma = f.numeric() ? sigma : 0.0;
    if (f.numeric()) {
      normalization_.mean[i] = mean;
      // Constant columns keep a unit scale so normalization stays defined.
      normalization_.stddev[i] = sigma > 0.0 ? sigma : 1.0;
    }
  }
}

Dataset Dataset::with_statistics_of(const Dataset& reference) const {
  if (reference.schema_.size() != schema_.size()) {
    throw DataError("with_statistics_of: schema mismatch");
  }
  Dataset out = *this;
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    out.schema_[i].observed_min = reference.schema_[i].observed_min;
    out.schema_[i].observed_max = reference.schema_[i].observed_max;
    out.schema_[i].sigma = reference.schema_[i].sigma;
  }
  out.normalization_ = reference.normalization_;
  return out;
}

const std::vector<int>& Dataset::labels() const {
  if (!labels_) throw DataError("dataset has no labels");
  return *labels_;
}

std::size_t Dataset::class_count() const {
  if (!class_names_.empty()) return class_names_.size();
  if (!labels_) return 0;
  return static_cast<std::size_t>(*std::max_element(labels_->begin(), labels_->end())) + 1;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw DataError("subset: empty index list");
  std::vector<Instance> rows;
  rows.reserve(indices.size());
  std::optional<std::vector<int>> labels;
  if (labels_) labels.emplace();
  for (auto i : indices) {
    rows.push_back(rows_.at(i));
    if (labels_) labels->push_back((*labels_)[i]);
  }
  return Dataset(schema_, std::move(rows), std::move(labels), class_names_);
}

Dataset Dataset::with_schema_annotations(const Schema& annotated) const {
  Dataset out = *this;
  for (const auto& a : annotated) {
    auto idx = find_feature(out.schema_, a.name);
    if (!idx) throw DataError("annotation names unknown feature '" + a.name + "'");
    auto& f = out.schema_[*idx];
    f.mutability = a.mutability;
    f.direction = a.direction;
    f.edit_cost = a.edit_cost;
    f.validate();
  }
  return out;
}

// --- Schema files --------------------------------------------------------------

SchemaDocument parse_schema(const nlohmann::json& doc) {
  if (!doc.is_object()) throw DataError("schema document must be a JSON object");
  static const std::set<std::string> top_keys = {"schema_version", "label", "columns"};
  for (const auto& [key, _] : doc.items()) {
    if (!top_keys.count(key)) throw DataError("schema: unknown key '" + key + "'");
  }
  if (doc.contains("schema_version") && doc.at("schema_version").get<int>() != kSchemaVersion) {
    throw DataError("schema: unsupported schema_version");
  }
  if (!doc.contains("columns") || !doc.at("columns").is_array()) {
    throw DataError("schema: missing 'columns' array");
  }
  SchemaDocument out;
  if (doc.contains("label")) out.label_column = doc.at("label").get<std::string>();

  static const std::set<std::string> column_keys = {"name",      "kind",      "categories",
                                                    "mutability", "direction", "edit_cost"};
  std::set<std::string> seen;
  bool label_found = false;
  for (const auto& col : doc.at("columns")) {
    if (!col.is_object()) throw DataError("schema: column entries must be objects");
    for (const auto& [key, _] : col.items()) {
      if (!column_keys.count(key)) throw DataError("schema: unknown column key '" + key + "'");
    }
    FeatureSchema f;
    try {
      f.name = col.at("name").get<std::string>();
      const auto kind = col.at("kind").get<std::string>();
      if (kind == "numeric") {
        f.kind = FeatureKind::kNumeric;
      } else if (kind == "categorical") {
        f.kind = FeatureKind::kCategorical;
        if (!col.contains("categories")) throw DataError("categorical column without categories");
        f.categories = col.at("categories").get<std::vector<std::string>>();
      } else {
        throw DataError("unknown kind '" + kind + "'");
      }
      if (col.contains("categories") && f.kind != FeatureKind::kCategorical) {
        throw DataError("numeric column declares categories");
      }
      f.mutability = parse_mutability(col.value("mutability", std::string("mutable")));
      if (col.contains("direction")) f.direction = parse_direction(col.at("direction").get<std::string>());
      f.edit_cost = col.value("edit_cost", 1.0);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("schema: malformed column: ") + e.what());
    } catch (const DataError& e) {
      throw DataError("schema: column '" + f.name + "': " + e.what());
    }
    if (!seen.insert(f.name).second) throw DataError("schema: duplicate column '" + f.name + "'");
    if (out.label_column && f.name == *out.label_column) {
      if (!f.categorical()) throw DataError("schema: label column must be categorical");
      out.class_names = f.categories;
      label_found = true;
      continue;
    }
    f.validate();
    out.features.push_back(std::move(f));
  }
  if (out.label_column && !label_found) {
    throw DataError("schema: label column '" + *out.label_column + "' is not declared");
  }
  if (out.features.empty()) throw DataError("schema: no feature columns");
  return out;
}

SchemaDocument load_schema(const std::filesystem::path& schema_file) {
  const auto text = read_file(schema_file, "schema file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("schema file '" + schema_file.string() + "': " + e.what());
  }
  return parse_schema(doc);
}

nlohmann::json schema_to_json(const SchemaDocument& doc) {
  nlohmann::json columns = nlohmann::json::array();
  for (const auto& f : doc.features) {
    nlohmann::json col = {{"name", f.name}, {"kind", to_string(f.kind)},
                          {"mutability", to_string(f.mutability)}, {"edit_cost", f.edit_cost}};
    if (f.categorical()) col["categories"] = f.categories;
    if (f.direction != Direction::kNone) col["direction"] = to_string(f.direction);
    columns.push_back(std::move(col));
  }
  if (doc.label_column) {
    columns.push_back({{"name", *doc.label_column},
                       {"kind", "categorical"},
                       {"categories", doc.class_names},
                       {"mutability", "immutable"}});
  }
  nlohmann::json out = {{"schema_version", kSchemaVersion}, {"columns", std::move(columns)}};
  if (doc.label_column) out["label"] = *doc.label_column;
  return out;
}

Dataset load_dataset_from_string(const std::string& csv_text, const SchemaDocument& schema) {
  auto records = csv::parse(csv_text);
  if (records.empty()) throw DataError("data file is empty (header row required)");
  const auto& header = records.front().fields;

  std::unordered_map<std::string, std::size_t> column_of;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!column_of.emplace(header[c], c).second) {
      throw DataError("duplicate header column '" + header[c] + "'");
    }
  }
  std::vector<std::size_t> feature_column(schema.features.size());
  for (std::size_t i = 0; i < schema.features.size(); ++i) {
    auto it = column_of.find(schema.features[i].name);
    if (it == column_of.end()) {
      throw DataError("missing column '" + schema.features[i].name + "' in data header");
    }
    feature_column[i] = it->second;
  }
  std::optional<std::size_t> label_column;
  if (schema.label_column) {
    auto it = column_of.find(*schema.label_column);
    if (it == column_of.end()) {
      throw DataError("missing label column '" + *schema.label_column + "' in data header");
    }
    label_column = it->second;
  }
  std::size_t declared = schema.features.size() + (schema.label_column ? 1 : 0);
  if (header.size() != declared) {
    for (const auto& name : header) {
      if (!find_feature(schema.features, name) && name != schema.label_column.value_or("")) {
        throw DataError("data column '" + name + "' is not declared in the schema");
      }
    }
  }

  std::vector<std::unordered_map<std::string, std::size_t>> category_index(schema.features.size());
  for (std::size_t i = 0; i < schema.features.size(); ++i) {
    const auto& cats = schema.features[i].categories;
    for (std::size_t c = 0; c < cats.size(); ++c) category_index[i][cats[c]] = c;
  }
  std::unordered_map<std::string, int> class_index;
  for (std::size_t c = 0; c < schema.class_names.size(); ++c) {
    class_index[schema.class_names[c]] = static_cast<int>(c);
  }

  std::vector<Instance> rows;
  std::optional<std::vector<int>> labels;
  if (label_column) labels.emplace();
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t row_number = r;  // 1-based data row
    if (rec.fields.size() != header.size()) {
      throw DataError("row " + std::to_string(row_number) + " (line " + std::to_string(rec.line) +
                      "): expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(rec.fields.size()));
    }
    Instance x;
    x.values.resize(schema.features.size());
    for (std::size_t i = 0; i < schema.features.size(); ++i) {
      const auto& f = schema.features[i];
      const auto& cell = rec.fields[feature_column[i]];
      if (cell.empty()) {
        throw DataError(location(row_number, rec.line, f.name) + ": missing value");
      }
      if (f.categorical()) {
        auto it = category_index[i].find(cell);
        if (it == category_index[i].end()) {
          throw DataError(location(row_number, rec.line, f.name) + ": unknown category '" + cell +
                          "'");
        }
        x[i] = static_cast<double>(it->second);
      } else {
        auto v = parse_double(cell);
        if (!v) {
          throw DataError(location(row_number, rec.line, f.name) + ": non-numeric value '" + cell +
                          "'");
        }
        x[i] = *v;
      }
    }
    if (label_column) {
      const auto& cell = rec.fields[*label_column];
      auto it = class_index.find(cell);
      if (it == class_index.end()) {
        throw DataError(location(row_number, rec.line, *schema.label_column) +
                        ": unknown category '" + cell + "'");
      }
      labels->push_back(it->second);
    }
    rows.push_back(std::move(x));
  }
  if (rows.empty()) throw DataError("data file has a header but no rows");
  return Dataset(schema.features, std::move(rows), std::move(labels), schema.class_names);
}

Dataset load_dataset(const std::filesystem::path& data_file,
                     const std::filesystem::path& schema_file) {
  const auto schema = load_schema(schema_file);
  return load_dataset_from_string(read_file(data_file, "data file"), schema);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t rows, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DataError("train_fraction must lie strictly between 0 and 1");
  }
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Fisher-Yates with explicit draws so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = rows; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows)));
  if (n_train == 0 || n_train >= rows) throw DataError("split would leave an empty partition");
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
  auto [train_idx, test_idx] = split_indices(dataset.size(), train_fraction, seed);
  Dataset train = dataset.subset(train_idx);
  Dataset test = dataset.subset(test_idx).with_statistics_of(train);
  return {std::move(train), std::move(test)};
}

}  // namespace ctrex
