#pragma once

// Directed weighted graph over surrogate-tree nodes and the one-to-many
// shortest-path search from the anchor's leaf to every contrast leaf.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrex/dataset.hpp"
#include "ctrex/surrogate.hpp"

namespace ctrex {

enum class RuleOp { kGreater, kLessEqual, kEqual, kNotEqual };

std::string to_string(RuleOp op);

/// f_i (op) value. Categorical values are category indices.
struct Rule {
  std::size_t feature = 0;
  RuleOp op = RuleOp::kGreater;
  double value = 0.0;

  bool satisfied_by(double v) const;
  friend bool operator==(const Rule&, const Rule&) = default;
};

/// Everything a path demands of one feature, merged: a half-open numeric
/// interval (lower, upper] or a categorical assignment / exclusion set.
struct FeatureConstraint {
  std::size_t feature = 0;
  bool categorical = false;
  std::optional<double> lower;  // value > lower
  std::optional<double> upper;  // value <= upper
  std::optional<int> equals;
  std::vector<int> excluded;  // sorted, distinct

  void add(const Rule& rule);
  bool empty_region() const;
  bool satisfied_by(double v) const;
  /// Rules equivalent to this constraint, lower bound first.
  std::vector<Rule> rules() const;
};

/// True when some value satisfying `c` is reachable from `from` under the
/// feature's mutability and direction.
bool constraint_feasible(const FeatureSchema& feature, const FeatureConstraint& c, double from);

/// The condition a tree node's incoming branch imposes.
Rule branch_rule(const SplitTest& test, bool left);

enum class VertexKind { kInternal, kFactLeaf, kContrastLeaf, kOtherLeaf };

struct GraphEdge {
  int from = 0;
  int to = 0;
  double weight = 0.0;
  std::optional<Rule> condition;  // downward edges only
};

struct FactLeaf {
  int leaf = 0;
  /// The surrogate labels x's leaf differently from the black box.
  bool disagrees = false;
};

FactLeaf locate_fact_leaf(const SurrogateTree& tree, const Instance& x, int fact_label);

struct ContrastGraph {
  Instance anchor;
  int fact_label = 0;
  int contrast_label = 1;
  int u_start = 0;
  bool start_disagrees = false;
  std::vector<VertexKind> kinds;
  std::vector<int> tree_parent;
  /// Condition on the branch entering each vertex (none for the root).
  std::vector<std::optional<Rule>> entry_rule;
  std::vector<GraphEdge> edges;  // infinite-weight edges are absent
  std::vector<std::vector<int>> out_edges;

  std::size_t vertex_count() const { return kinds.size(); }
};

/// Downward edge i -> j costs edit_cost(f) when x violates j's condition on f
/// and no earlier condition on the root path already forced a change of f;
/// otherwise 0. It is omitted when the merged demand on f cannot be met from
/// x (direction, immutability or an empty region). Upward edges cost 0.
ContrastGraph build_graph(const SurrogateTree& tree, const Instance& x, const Schema& schema,
                          int fact_label, int contrast_label);

struct ContrastPath {
  int target = 0;
  double cost = 0.0;
  std::vector<int> vertices;  // u_start ... target
  /// Features that must change, each with the full merged demand of the
  /// target region so that satisfying the rules routes to the target.
  std::vector<FeatureConstraint> changes;
  std::vector<Rule> rules;

  std::size_t rule_count() const { return rules.size(); }
};

struct SearchResult {
  std::vector<ContrastPath> paths;  // ascending by (cost, rule count, target)
  /// u_start itself is contrast-labelled; it is never a target.
  bool start_is_contrast = false;
};

/// Dijkstra from u_start. Every reachable contrast leaf appears once.
SearchResult shortest_paths(const ContrastGraph& graph);

/// Per-feature merged demand of the region of `vertex` (root path conditions).
std::vector<FeatureConstraint> region_constraints(const ContrastGraph& graph, int vertex);

nlohmann::json rule_to_json(const Rule& rule, const Schema& schema);
nlohmann::json path_to_json(const ContrastPath& path, const Schema& schema);
std::string rule_to_text(const Rule& rule, const Schema& schema);

}  // namespace ctrex
