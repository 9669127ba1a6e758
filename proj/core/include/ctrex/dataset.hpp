#pragma once

// Tabular data ingestion, feature schema with mutability/cost annotations,
// and the normalization + one-hot encoding shared by every vector consumer.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace ctrex {

/// Raised for malformed data or schema files. The message carries the
/// row/column location when one is known.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FeatureKind { kNumeric, kCategorical };
enum class Mutability { kMutable, kImmutable, kSemiImmutable };
enum class Direction { kNone, kIncreaseOnly, kDecreaseOnly };

std::string to_string(FeatureKind kind);
std::string to_string(Mutability mutability);
std::string to_string(Direction direction);
Mutability parse_mutability(const std::string& text);
Direction parse_direction(const std::string& text);

struct FeatureSchema {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  std::vector<std::string> categories;  // categorical only
  Mutability mutability = Mutability::kMutable;
  Direction direction = Direction::kNone;  // semi-immutable only
  double edit_cost = 1.0;

  // Observed statistics, filled in from the training rows.
  double observed_min = 0.0;
  double observed_max = 0.0;
  double sigma = 0.0;  // population standard deviation

  bool numeric() const { return kind == FeatureKind::kNumeric; }
  bool categorical() const { return kind == FeatureKind::kCategorical; }
  bool immutable() const { return mutability == Mutability::kImmutable; }

  /// True when moving the value from `from` to `to` is allowed.
  bool change_allowed(double from, double to) const;

  /// Throws DataError when an invariant does not hold.
  void validate() const;
};

using Schema = std::vector<FeatureSchema>;

/// Index of the feature called `name`, or nullopt.
std::optional<std::size_t> find_feature(const Schema& schema, std::string_view name);

/// One row of raw feature values. Categorical values are category indices.
struct Instance {
  std::vector<double> values;
  std::optional<std::string> id;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  friend bool operator==(const Instance& a, const Instance& b) { return a.values == b.values; }
};

/// Throws DataError if `x` does not conform to `schema`.
void check_conforms(const Schema& schema, const Instance& x);

/// Per-feature centering/scaling. Categorical entries are (0, 1) and unused.
struct Normalization {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Maps raw instances to the normalized, one-hot encoded vectors consumed by
/// black boxes and the VAE.
class Encoder {
 public:
  Encoder() = default;
  Encoder(Schema schema, Normalization normalization);

  const Schema& schema() const { return schema_; }
  const Normalization& normalization() const { return normalization_; }

  /// Width of the encoded vector (numerics + one-hot blocks).
  std::size_t width() const { return width_; }
  /// Offset of feature `i` inside the encoded vector.
  std::size_t offset(std::size_t feature) const { return offsets_[feature]; }
  /// Mask over encoded coordinates: true for one-hot coordinates.
  std::vector<bool> binary_mask() const;

  std::vector<double> encode(const Instance& x) const;
  void encode_into(const Instance& x, std::span<double> out) const;

  /// Numeric values mapped to (v - mean) / std; categoricals untouched.
  Instance normalize(const Instance& x) const;
  Instance denormalize(const Instance& x) const;

  nlohmann::json to_json() const;
  static Encoder from_json(const nlohmann::json& doc);

 private:
  Schema schema_;
  Normalization normalization_;
  std::vector<std::size_t> offsets_;
  std::size_t width_ = 0;
};

/// One-hot vector of length `category_count` with a 1 at `index`.
std::vector<double> one_hot(std::size_t index, std::size_t category_count);

class Dataset {
 public:
  /// Builds a dataset and computes statistics (min/max/sigma/normalization)
  /// from `rows`. Every row is validated against the schema.
  Dataset(Schema schema, std::vector<Instance> rows,
          std::optional<std::vector<int>> labels = std::nullopt,
          std::vector<std::string> class_names = {});

  /// Same rows, statistics copied from `reference` (used for test splits,
  /// whose normalization must come from the training split).
  Dataset with_statistics_of(const Dataset& reference) const;

  const Schema& schema() const { return schema_; }
  std::size_t size() const { return rows_.size(); }
  std::size_t feature_count() const { return schema_.size(); }
  const Instance& row(std::size_t i) const { return rows_.at(i); }
  std::span<const Instance> rows() const { return rows_; }

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<int>& labels() const;
  const std::vector<std::string>& class_names() const { return class_names_; }
  std::size_t class_count() const;

  const Normalization& normalization() const { return normalization_; }
  Encoder encoder() const { return Encoder(schema_, normalization_); }

  /// Copy with a subset of rows; statistics are recomputed on the subset.
  Dataset subset(std::span<const std::size_t> indices) const;

  /// Copy whose schema replaces mutability/cost annotations by name.
  Dataset with_schema_annotations(const Schema& annotated) const;

 private:
  Dataset() = default;
  void compute_statistics();

  Schema schema_;
  std::vector<Instance> rows_;
  std::optional<std::vector<int>> labels_;
  std::vector<std::string> class_names_;
  Normalization normalization_;
};

/// Parsed schema file: feature columns plus an optional label column.
struct SchemaDocument {
  Schema features;
  std::optional<std::string> label_column;
  std::vector<std::string> class_names;
};

SchemaDocument parse_schema(const nlohmann::json& doc);
SchemaDocument load_schema(const std::filesystem::path& schema_file);
nlohmann::json schema_to_json(const SchemaDocument& doc);

/// Reads a CSV file with header row whose columns are declared by the schema.
Dataset load_dataset(const std::filesystem::path& data_file,
                     const std::filesystem::path& schema_file);
Dataset load_dataset_from_string(const std::string& csv_text, const SchemaDocument& schema);

/// Deterministic shuffled split. The test part carries the training
/// statistics. Throws if either part would be empty.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed);

/// Row indices (train, test) used by `split`.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t rows, double train_fraction, std::uint64_t seed);

}  // namespace ctrex
