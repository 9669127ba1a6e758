#pragma once

// Local entropy decision tree approximating the black box on a neighborhood.
// Immutable features are never offered as split candidates.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrex/blackbox.hpp"
#include "ctrex/dataset.hpp"
#include "ctrex/neighborhood.hpp"

namespace ctrex {

class SurrogateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TestKind {
  kThreshold,  // value <= threshold goes left
  kCategory,   // value == category goes left
};

struct SplitTest {
  TestKind kind = TestKind::kThreshold;
  std::size_t feature = 0;
  double threshold = 0.0;
  int category = 0;

  bool goes_left(double value) const {
    return kind == TestKind::kThreshold ? value <= threshold : value == static_cast<double>(category);
  }
  friend bool operator==(const SplitTest&, const SplitTest&) = default;
};

struct TreeNode {
  int parent = -1;
  int left = -1;
  int right = -1;
  std::optional<SplitTest> test;  // set on internal nodes
  std::vector<std::size_t> counts;  // training class counts reaching the node
  int label = 0;                    // argmax of counts, lowest class on ties
  int depth = 0;
  std::size_t support = 0;

  bool is_leaf() const { return left < 0; }
};

struct TreeConfig {
  int max_depth = 6;
  std::size_t min_samples_leaf = 5;
  /// 0 means unlimited; otherwise best-first growth stops at this many leaves.
  std::size_t max_leaves = 0;
};

class SurrogateTree {
 public:
  /// Validates the arena: binary internal nodes, consistent parent links,
  /// depth bound, no test on an excluded feature, leaf label = argmax counts.
  SurrogateTree(std::vector<TreeNode> nodes, std::size_t class_count, TreeConfig config,
                std::vector<std::size_t> excluded_features);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  int depth() const;
  std::size_t class_count() const { return class_count_; }
  const TreeConfig& config() const { return config_; }
  const std::vector<std::size_t>& excluded_features() const { return excluded_; }

  /// Leaf reached by routing `values` through the tests.
  int leaf_of(std::span<const double> values) const;
  int leaf_of(const Instance& x) const { return leaf_of(x.values); }
  int predict(const Instance& x) const { return node(leaf_of(x)).label; }

  nlohmann::json to_json(const Schema& schema) const;
  /// Indented if/else dump of the tree.
  std::string rule_dump(const Schema& schema) const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t class_count_;
  TreeConfig config_;
  std::vector<std::size_t> excluded_;
};

/// tree_predict
inline int tree_predict(const SurrogateTree& tree, const Instance& x) { return tree.predict(x); }

/// Shannon entropy in bits; 0 log 0 = 0. Throws on an all-zero count vector.
double entropy(std::span<const std::size_t> counts);

struct Split {
  SplitTest test;
  double gain = 0.0;
  std::size_t left_size = 0;
  std::size_t right_size = 0;
};

/// Highest information-gain split of the rows in `subset`. Numeric candidates
/// are midpoints between consecutive distinct values; categorical candidates
/// are one-vs-rest. Ties go to the lower feature index, then the smaller
/// threshold/category. Splits leaving a side below `min_samples_leaf` or with
/// zero gain are not considered.
std::optional<Split> best_split(std::span<const Instance> samples, std::span<const int> labels,
                                std::span<const std::size_t> subset, const Schema& schema,
                                std::span<const std::size_t> excluded, std::size_t class_count,
                                std::size_t min_samples_leaf);

/// Indices of the immutable features of `schema`.
std::vector<std::size_t> immutable_features(const Schema& schema);

SurrogateTree fit_tree(std::span<const Instance> samples, std::span<const int> labels,
                       const Schema& schema, std::size_t class_count, const TreeConfig& config);
SurrogateTree fit_tree(const NeighborSet& neighbors, const Schema& schema, const TreeConfig& config);

/// Fraction of members whose recorded black-box label the tree reproduces.
double fidelity(const SurrogateTree& tree, const NeighborSet& eval_set);
/// Same, with labels recomputed from `model`.
double fidelity(const SurrogateTree& tree, const BlackBox& model, const NeighborSet& eval_set);

/// Bottom-up reduced-error pruning: an internal node becomes a leaf whenever
/// that does not lower agreement with the labels on the evaluation rows.
SurrogateTree prune(const SurrogateTree& tree, std::span<const Instance> samples,
                    std::span<const int> labels);
SurrogateTree prune(const SurrogateTree& tree, const NeighborSet& eval_set);

}  // namespace ctrex
