#include "ctrex/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "csv.hpp"
#include "ctrex/random.hpp"

namespace ctrex {

namespace {

FeatureSchema numeric(std::string name, Mutability m = Mutability::kMutable, Direction d = Direction::kNone,
                      double cost = 1.0) {
  FeatureSchema f;
  f.name = std::move(name);
  f.mutability = m;
  f.direction = d;
  f.edit_cost = cost;
  return f;
}

FeatureSchema categorical(std::string name, std::vector<std::string> cats, Mutability m = Mutability::kMutable) {
  FeatureSchema f;
  f.name = std::move(name);
  f.kind = FeatureKind::kCategorical;
  f.categories = std::move(cats);
  f.mutability = m;
  return f;
}

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

// Rounded to 4 decimals so CSV round trips are exact.
double r4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

Dataset make_blobs(std::size_t rows, std::uint64_t seed) {
  Schema schema = {numeric("age", Mutability::kSemiImmutable, Direction::kIncreaseOnly),
                   numeric("income"),
                   numeric("savings"),
                   numeric("debt", Mutability::kSemiImmutable, Direction::kDecreaseOnly),
                   categorical("race", {"a", "b", "c"}, Mutability::kImmutable),
                   categorical("housing", {"rent", "own", "other"})};
  std::mt19937_64 rng(seed);
  std::vector<Instance> data;
  std::vector<int> labels;
  for (std::size_t i = 0; i < rows; ++i) {
    const int y = static_cast<int>(i % 2);
    Instance x;
    x.values = {r4(40.0 + 10.0 * standard_normal(rng)),
                r4((y ? 78.0 : 30.0) + 8.0 * standard_normal(rng)),
                r4((y ? 18.0 : 14.0) + 4.0 * standard_normal(rng)),
                r4((y ? 24.0 : 28.0) + 6.0 * standard_normal(rng)),
                static_cast<double>(pick(rng, 3)),
                static_cast<double>(uniform(rng) < (y ? 0.6 : 0.3) ? 1 : pick(rng, 3))};
    data.push_back(std::move(x));
    labels.push_back(y);
  }
  return Dataset(std::move(schema), std::move(data), std::move(labels), {"low", "high"});
}

Dataset make_moons(std::size_t rows, std::uint64_t seed, double noise) {
  Schema schema = {numeric("x1"),
                   numeric("x2"),
                   numeric("tenure", Mutability::kSemiImmutable, Direction::kIncreaseOnly),
                   categorical("group", {"g0", "g1"}, Mutability::kImmutable),
                   categorical("channel", {"web", "store", "phone"})};
  std::mt19937_64 rng(seed);
  std::vector<Instance> data;
  std::vector<int> labels;
  for (std::size_t i = 0; i < rows; ++i) {
    const int y = static_cast<int>(i % 2);
    const double t = std::numbers::pi * uniform(rng);
    double a = y ? 1.0 - std::cos(t) : std::cos(t);
    double b = y ? 0.5 - std::sin(t) : std::sin(t);
    a += noise * standard_normal(rng);
    b += noise * standard_normal(rng);
    Instance x;
    x.values = {r4(a), r4(b), r4(20.0 * uniform(rng)), static_cast<double>(pick(rng, 2)),
                static_cast<double>(pick(rng, 3))};
    data.push_back(std::move(x));
    labels.push_back(y);
  }
  return Dataset(std::move(schema), std::move(data), std::move(labels), {"outer", "inner"});
}

Dataset make_xor(std::size_t rows, std::uint64_t seed) {
  Schema schema = {numeric("a"), numeric("b")};
  std::mt19937_64 rng(seed);
  std::vector<Instance> data;
  std::vector<int> labels;
  for (std::size_t i = 0; i < rows; ++i) {
    Instance x;
    x.values = {r4(2.0 * uniform(rng) - 1.0), r4(2.0 * uniform(rng) - 1.0)};
    labels.push_back((x[0] > 0) != (x[1] > 0) ? 1 : 0);
    data.push_back(std::move(x));
  }
  return Dataset(std::move(schema), std::move(data), std::move(labels), {"same", "different"});
}

Dataset digit_pair(const Dataset& digits, int a, int b) {
  if (!digits.has_labels()) throw DataError("digit_pair needs a labelled dataset");
  std::vector<Instance> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    const int y = digits.labels()[i];
    if (y != a && y != b) continue;
    rows.push_back(digits.row(i));
    labels.push_back(y == a ? 0 : 1);
  }
  auto name = [&](int c) {
    const auto& names = digits.class_names();
    return static_cast<std::size_t>(c) < names.size() ? names[static_cast<std::size_t>(c)] : std::to_string(c);
  };
  Schema schema = digits.schema();
  return Dataset(std::move(schema), std::move(rows), std::move(labels), {name(a), name(b)});
}

std::string dataset_to_csv(const Dataset& data, const std::string& label_column) {
  std::ostringstream out;
  out.precision(17);
  const auto& schema = data.schema();
  for (std::size_t i = 0; i < schema.size(); ++i) out << (i ? "," : "") << csv::escape(schema[i].name);
  if (data.has_labels()) out << "," << csv::escape(label_column);
  out << "\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto& x = data.row(r);
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (i) out << ",";
      if (schema[i].categorical()) {
        out << csv::escape(schema[i].categories.at(static_cast<std::size_t>(x[i])));
      } else {
        out << x[i];
      }
    }
    if (data.has_labels()) {
      const int y = data.labels()[r];
      const auto& names = data.class_names();
      out << "," << csv::escape(static_cast<std::size_t>(y) < names.size() ? names[static_cast<std::size_t>(y)]
                                                                         : std::to_string(y));
    }
    out << "\n";
  }
  return out.str();
}

void save_dataset(const Dataset& data, const std::string& label_column, const std::filesystem::path& csv_path,
                  const std::filesystem::path& schema_path) {
  SchemaDocument doc;
  doc.features = data.schema();
  if (data.has_labels()) {
    doc.label_column = label_column;
    doc.class_names = data.class_names();
    if (doc.class_names.empty()) {
      for (std::size_t c = 0; c < data.class_count(); ++c) doc.class_names.push_back(std::to_string(c));
    }
  }
  std::ofstream csv_out(csv_path);
  if (!csv_out) throw DataError("cannot write " + csv_path.string());
  csv_out << dataset_to_csv(data, label_column);
  std::ofstream schema_out(schema_path);
  if (!schema_out) throw DataError("cannot write " + schema_path.string());
  schema_out << schema_to_json(doc).dump(2) << "\n";
}

}  // namespace ctrex
