#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "ctrex/surrogate.hpp"
#include "oracles.hpp"

using namespace ctrex;

namespace {

struct Sample {
  Schema schema;
  std::vector<Instance> rows;
  std::vector<int> labels;
};

// Labels follow a noisy rule on the first two features so splits have signal.
Sample random_sample(std::mt19937_64& rng, std::size_t n) {
  Sample s;
  s.schema = oracle::random_schema(rng, 3, 2, true);
  std::bernoulli_distribution flip(0.1);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = oracle::random_instance(rng, s.schema);
    int y = (x[0] + 0.5 * x[1] > 0.3) ? 1 : 0;
    if (x[3] == 1) y = 1 - y;
    if (flip(rng)) y = 1 - y;
    s.rows.push_back(x);
    s.labels.push_back(y);
  }
  return s;
}

void expect_same_split(const std::optional<Split>& got, const std::optional<oracle::OracleSplit>& want) {
  ASSERT_EQ(got.has_value(), want.has_value());
  if (!got) return;
  EXPECT_EQ(got->test.feature, want->feature);
  EXPECT_EQ(got->test.kind == TestKind::kCategory, want->categorical);
  if (want->categorical) {
    EXPECT_EQ(got->test.category, want->category);
  } else {
    EXPECT_EQ(got->test.threshold, want->threshold);
  }
  EXPECT_NEAR(got->gain, want->gain, 1e-9);
}

}  // namespace

TEST(Entropy, KnownValues) {
  const std::vector<std::size_t> pure{5, 0}, half{3, 3}, quarter{1, 3}, three{1, 1, 1};
  EXPECT_DOUBLE_EQ(entropy(pure), 0.0);
  EXPECT_DOUBLE_EQ(entropy(half), 1.0);
  EXPECT_NEAR(entropy(quarter), -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75)), 1e-12);
  EXPECT_NEAR(entropy(three), std::log2(3.0), 1e-12);
  const std::vector<std::size_t> none{0, 0};
  EXPECT_THROW(entropy(none), SurrogateError);
}

TEST(BestSplit, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_sample(rng, 20 + static_cast<std::size_t>(trial) * 2);
    std::vector<std::size_t> subset(s.rows.size());
    std::iota(subset.begin(), subset.end(), 0);
    const auto excluded = immutable_features(s.schema);
    for (std::size_t min_leaf : {1u, 5u}) {
      const auto got = best_split(s.rows, s.labels, subset, s.schema, excluded, 2, min_leaf);
      const auto want = oracle::exhaustive_split(s.rows, s.labels, s.schema, 2, min_leaf);
      SCOPED_TRACE("trial " + std::to_string(trial) + " min_leaf " + std::to_string(min_leaf));
      expect_same_split(got, want);
    }
  }
}

TEST(BestSplit, TiesGoToLowerFeature) {
  Schema schema(2);
  schema[0].name = "a";
  schema[1].name = "b";
  // Both features separate the classes perfectly at the same place.
  std::vector<Instance> rows{{{0, 0}}, {{0, 0}}, {{1, 1}}, {{1, 1}}};
  std::vector<int> labels{0, 0, 1, 1};
  std::vector<std::size_t> subset{0, 1, 2, 3};
  const auto s = best_split(rows, labels, subset, schema, {}, 2, 1);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->test.feature, 0u);
  EXPECT_DOUBLE_EQ(s->test.threshold, 0.5);
  EXPECT_DOUBLE_EQ(s->gain, 1.0);
}

TEST(FitTree, EveryInternalNodeIsTheExhaustiveBest) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = random_sample(rng, 150);
    TreeConfig config;
    config.max_depth = 4;
    config.min_samples_leaf = 3;
    const auto tree = fit_tree(s.rows, s.labels, s.schema, 2, config);
    // Route rows to nodes.
    std::vector<std::vector<std::size_t>> at(tree.node_count());
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
      int v = 0;
      at[0].push_back(i);
      while (!tree.node(v).is_leaf()) {
        v = tree.node(v).test->goes_left(s.rows[i][tree.node(v).test->feature]) ? tree.node(v).left
                                                                                   : tree.node(v).right;
        at[static_cast<std::size_t>(v)].push_back(i);
      }
    }
    for (std::size_t v = 0; v < tree.node_count(); ++v) {
      const auto& node = tree.node(static_cast<int>(v));
      std::vector<Instance> rows;
      std::vector<int> labels;
      for (auto i : at[v]) {
        rows.push_back(s.rows[i]);
        labels.push_back(s.labels[i]);
      }
      EXPECT_EQ(node.support, rows.size());
      if (node.is_leaf()) {
        if (node.depth < config.max_depth) {
          EXPECT_FALSE(oracle::exhaustive_split(rows, labels, s.schema, 2, config.min_samples_leaf));
        }
        continue;
      }
      const auto want = oracle::exhaustive_split(rows, labels, s.schema, 2, config.min_samples_leaf);
      ASSERT_TRUE(want);
      EXPECT_EQ(node.test->feature, want->feature);
      if (!want->categorical) EXPECT_EQ(node.test->threshold, want->threshold);
      if (want->categorical) EXPECT_EQ(node.test->category, want->category);
    }
  }
}

TEST(FitTree, RespectsLimitsAndExclusions) {
  std::mt19937_64 rng(3);
  const auto s = random_sample(rng, 300);
  TreeConfig config;
  config.max_depth = 3;
  config.min_samples_leaf = 10;
  const auto tree = fit_tree(s.rows, s.labels, s.schema, 2, config);
  EXPECT_LE(tree.depth(), 3);
  const auto excluded = immutable_features(s.schema);
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) {
      EXPECT_GE(n.support, 10u);
    } else {
      EXPECT_EQ(std::find(excluded.begin(), excluded.end(), n.test->feature), excluded.end());
    }
  }
  config.max_leaves = 3;
  EXPECT_LE(fit_tree(s.rows, s.labels, s.schema, 2, config).leaf_count(), 3u);
}

TEST(FitTree, FailsOnDegenerateInput) {
  std::mt19937_64 rng(5);
  auto s = random_sample(rng, 40);
  std::vector<int> one(s.labels.size(), 1);
  EXPECT_THROW(fit_tree(s.rows, one, s.schema, 2, {}), SurrogateError);
  for (auto& f : s.schema) f.mutability = Mutability::kImmutable;
  EXPECT_THROW(fit_tree(s.rows, s.labels, s.schema, 2, {}), SurrogateError);
}

TEST(Prune, NeverLowersAgreementAndShrinks) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_sample(rng, 200);
    TreeConfig config;
    config.min_samples_leaf = 1;
    const auto tree = fit_tree(s.rows, s.labels, s.schema, 2, config);
    std::vector<Instance> eval_rows(s.rows.begin(), s.rows.begin() + 100);
    std::vector<int> eval_labels(s.labels.begin(), s.labels.begin() + 100);
    const auto pruned = prune(tree, eval_rows, eval_labels);
    auto agree = [&](const SurrogateTree& t) {
      std::size_t ok = 0;
      for (std::size_t i = 0; i < eval_rows.size(); ++i) ok += t.predict(eval_rows[i]) == eval_labels[i];
      return ok;
    };
    EXPECT_GE(agree(pruned), agree(tree));
    EXPECT_LE(pruned.node_count(), tree.node_count());
  }
}

TEST(Tree, RejectsInvalidArenas) {
  std::vector<TreeNode> nodes(1);
  nodes[0].counts = {3, 1};
  nodes[0].label = 1;
  EXPECT_THROW(SurrogateTree(nodes, 2, {}, {}), SurrogateError);
  nodes[0].label = 0;
  EXPECT_NO_THROW(SurrogateTree(nodes, 2, {}, {}));
  nodes[0].left = 1;
  EXPECT_THROW(SurrogateTree(nodes, 2, {}, {}), SurrogateError);
}

TEST(Tree, ExportsJsonAndRules) {
  std::mt19937_64 rng(9);
  const auto s = random_sample(rng, 120);
  const auto tree = fit_tree(s.rows, s.labels, s.schema, 2, {});
  const auto doc = tree.to_json(s.schema);
  ASSERT_TRUE(doc.contains("nodes"));
  EXPECT_EQ(doc["nodes"].size(), tree.node_count());
  const auto dump = tree.rule_dump(s.schema);
  EXPECT_NE(dump.find("if "), std::string::npos);
  EXPECT_NE(dump.find("class"), std::string::npos);
}
