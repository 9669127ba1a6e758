#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <gtest/gtest.h>

#include "ctrex/dataset.hpp"
#include "ctrex/synthetic.hpp"

using namespace ctrex;

namespace {

SchemaDocument small_schema() {
  return parse_schema(nlohmann::json::parse(R"({
    "schema_version": 1,
    "label": "y",
    "columns": [
      {"name": "age", "kind": "numeric", "mutability": "semi-immutable", "direction": "increase-only"},
      {"name": "income", "kind": "numeric", "edit_cost": 2.5},
      {"name": "city", "kind": "categorical", "categories": ["x", "y", "z"], "mutability": "immutable"},
      {"name": "y", "kind": "categorical", "categories": ["no", "yes"]}
    ]})"));
}

}  // namespace

TEST(Schema, ParsesAnnotations) {
  const auto doc = small_schema();
  ASSERT_EQ(doc.features.size(), 3u);
  EXPECT_EQ(doc.label_column.value(), "y");
  EXPECT_EQ(doc.class_names, (std::vector<std::string>{"no", "yes"}));
  EXPECT_EQ(doc.features[0].mutability, Mutability::kSemiImmutable);
  EXPECT_EQ(doc.features[0].direction, Direction::kIncreaseOnly);
  EXPECT_DOUBLE_EQ(doc.features[1].edit_cost, 2.5);
  EXPECT_TRUE(doc.features[2].categorical());
  EXPECT_TRUE(doc.features[2].immutable());
}

TEST(Schema, RoundTripsThroughJson) {
  const auto doc = small_schema();
  const auto again = parse_schema(schema_to_json(doc));
  ASSERT_EQ(again.features.size(), doc.features.size());
  for (std::size_t i = 0; i < doc.features.size(); ++i) {
    EXPECT_EQ(again.features[i].name, doc.features[i].name);
    EXPECT_EQ(again.features[i].mutability, doc.features[i].mutability);
    EXPECT_EQ(again.features[i].direction, doc.features[i].direction);
    EXPECT_EQ(again.features[i].edit_cost, doc.features[i].edit_cost);
  }
  EXPECT_EQ(again.class_names, doc.class_names);
}

TEST(Schema, RejectsBadDocuments) {
  auto bad = [](const char* text) { return parse_schema(nlohmann::json::parse(text)); };
  EXPECT_THROW(bad(R"({"columns": [{"name": "a", "kind": "numeric", "edit_cost": 0}]})"), DataError);
  EXPECT_THROW(bad(R"({"columns": [{"name": "a", "kind": "categorical", "categories": ["only"]}]})"), DataError);
  EXPECT_THROW(bad(R"({"columns": [{"name": "a", "kind": "text"}]})"), DataError);
  EXPECT_THROW(bad(R"({"label": "y", "columns": [{"name": "a", "kind": "numeric"}]})"), DataError);
  EXPECT_THROW(bad(R"({"columns": [{"name": "a", "kind": "numeric"}, {"name": "a", "kind": "numeric"}]})"),
               DataError);
}

TEST(FeatureSchema, ChangeAllowedFollowsMutability) {
  FeatureSchema f;
  EXPECT_TRUE(f.change_allowed(1, 0));
  f.mutability = Mutability::kImmutable;
  EXPECT_FALSE(f.change_allowed(1, 2));
  EXPECT_TRUE(f.change_allowed(1, 1));
  f.mutability = Mutability::kSemiImmutable;
  f.direction = Direction::kIncreaseOnly;
  EXPECT_TRUE(f.change_allowed(1, 2));
  EXPECT_FALSE(f.change_allowed(1, 0.5));
  f.direction = Direction::kDecreaseOnly;
  EXPECT_FALSE(f.change_allowed(1, 2));
  EXPECT_TRUE(f.change_allowed(1, 0.5));
}

TEST(Dataset, LoadsCsvAndComputesStatistics) {
  const auto data = load_dataset_from_string("age,income,city,y\n20,10,x,no\n30,20,y,yes\n40,60,z,yes\n",
                                             small_schema());
  ASSERT_EQ(data.size(), 3u);
  EXPECT_EQ(data.labels(), (std::vector<int>{0, 1, 1}));
  EXPECT_EQ(data.row(2)[2], 2.0);
  const auto& s = data.schema();
  EXPECT_EQ(s[0].observed_min, 20);
  EXPECT_EQ(s[0].observed_max, 40);
  // Population standard deviation computed directly.
  const double mean = 30.0;
  const double var = ((20 - mean) * (20 - mean) + 0 + (40 - mean) * (40 - mean)) / 3.0;
  EXPECT_NEAR(s[0].sigma, std::sqrt(var), 1e-12);
  EXPECT_NEAR(data.normalization().mean[1], 30.0, 1e-12);
}

TEST(Dataset, ConstantColumnHasZeroSigmaAndUnitScale) {
  std::string csv = "age,income,city,y\n";
  for (int i = 0; i < 100; ++i) csv += std::to_string(i) + ",7,x," + (i % 2 ? "yes" : "no") + "\n";
  const auto data = load_dataset_from_string(csv, small_schema());
  EXPECT_EQ(data.schema()[1].sigma, 0.0);
  EXPECT_EQ(data.normalization().stddev[1], 1.0);
  const auto z = data.encoder().normalize(data.row(3));
  EXPECT_EQ(z[1], 0.0);
}

TEST(Dataset, ErrorsNameTheLocation) {
  try {
    load_dataset_from_string("age,income,city,y\n20,10,x,no\n30,abc,y,yes\n", small_schema());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("income"), std::string::npos) << msg;
  }
  EXPECT_THROW(load_dataset_from_string("age,income,city,y\n20,10,w,no\n", small_schema()), DataError);
  EXPECT_THROW(load_dataset_from_string("age,income,y\n20,10,no\n", small_schema()), DataError);
  EXPECT_THROW(load_dataset_from_string("age,income,city,y\n20,10,x\n", small_schema()), DataError);
}

TEST(Dataset, MissingFilesAreReported) {
  try {
    load_dataset("/nonexistent/data.csv", "/nonexistent/schema.json");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/"), std::string::npos);
  }
}

TEST(Encoder, OneHotLayoutAndRoundTrip) {
  const auto data = load_dataset_from_string("age,income,city,y\n20,10,x,no\n30,20,y,yes\n40,60,z,yes\n",
                                             small_schema());
  const auto enc = data.encoder();
  EXPECT_EQ(enc.width(), 5u);
  EXPECT_EQ(enc.offset(2), 2u);
  const auto v = enc.encode(data.row(1));
  EXPECT_EQ(v[2], 0.0);
  EXPECT_EQ(v[3], 1.0);
  EXPECT_EQ(v[4], 0.0);
  const auto mask = enc.binary_mask();
  EXPECT_EQ(mask, (std::vector<bool>{false, false, true, true, true}));
  const auto back = enc.denormalize(enc.normalize(data.row(2)));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(back[i], data.row(2)[i], 1e-12);
  const auto again = Encoder::from_json(enc.to_json());
  EXPECT_EQ(again.encode(data.row(0)), enc.encode(data.row(0)));
}

TEST(Split, DeterministicDisjointAndCovering) {
  const auto data = make_blobs(200, 1);
  const auto [a1, b1] = split_indices(200, 0.8, 9);
  const auto [a2, b2] = split_indices(200, 0.8, 9);
  EXPECT_EQ(a1, a2);
  EXPECT_EQ(b1, b2);
  EXPECT_EQ(a1.size(), 160u);
  std::vector<int> seen(200, 0);
  for (auto i : a1) ++seen[i];
  for (auto i : b1) ++seen[i];
  for (int s : seen) EXPECT_EQ(s, 1);
  const auto [train, test] = split(data, 0.8, 9);
  EXPECT_EQ(test.normalization().mean, train.normalization().mean);
  EXPECT_THROW(split(data, 1.0, 9), DataError);
}

TEST(Synthetic, SavedFilesLoadBack) {
  const auto dir = std::filesystem::temp_directory_path() / "ctrex_dataset_test";
  std::filesystem::create_directories(dir);
  const auto data = make_moons(50, 4);
  save_dataset(data, "label", dir / "m.csv", dir / "m.json");
  const auto back = load_dataset(dir / "m.csv", dir / "m.json");
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(back.row(i), data.row(i));
  EXPECT_EQ(back.labels(), data.labels());
  EXPECT_EQ(back.schema()[2].direction, Direction::kIncreaseOnly);
}
