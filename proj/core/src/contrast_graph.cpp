#include "ctrex/contrast_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

namespace ctrex {

namespace {

constexpr double kCostTieEps = 1e-12;

bool needs_change(const FeatureConstraint& c, double v) { return !c.satisfied_by(v); }

FeatureConstraint& constraint_for(std::vector<FeatureConstraint>& list, std::size_t feature,
                                  bool categorical) {
  for (auto& c : list) {
    if (c.feature == feature) return c;
  }
  FeatureConstraint c;
  c.feature = feature;
  c.categorical = categorical;
  list.push_back(c);
  return list.back();
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

}  // namespace

std::string to_string(RuleOp op) {
  switch (op) {
    case RuleOp::kGreater:
      return ">";
    case RuleOp::kLessEqual:
      return "<=";
    case RuleOp::kEqual:
      return "==";
    case RuleOp::kNotEqual:
      return "!=";
  }
  return "?";
}

bool Rule::satisfied_by(double v) const {
  switch (op) {
    case RuleOp::kGreater:
      return v > value;
    case RuleOp::kLessEqual:
      return v <= value;
    case RuleOp::kEqual:
      return v == value;
    case RuleOp::kNotEqual:
      return v != value;
  }
  return false;
}

void FeatureConstraint::add(const Rule& rule) {
  switch (rule.op) {
    case RuleOp::kGreater:
      lower = lower ? std::max(*lower, rule.value) : rule.value;
      break;
    case RuleOp::kLessEqual:
      upper = upper ? std::min(*upper, rule.value) : rule.value;
      break;
    case RuleOp::kEqual: {
      const int c = static_cast<int>(rule.value);
      // Two different assignments leave nothing: exclude both.
      if (equals && *equals != c) {
        excluded.push_back(*equals);
        excluded.push_back(c);
      }
      equals = c;
      break;
    }
    case RuleOp::kNotEqual: {
      const int c = static_cast<int>(rule.value);
      if (!std::binary_search(excluded.begin(), excluded.end(), c)) {
        excluded.insert(std::upper_bound(excluded.begin(), excluded.end(), c), c);
      }
      break;
    }
  }
  std::sort(excluded.begin(), excluded.end());
  excluded.erase(std::unique(excluded.begin(), excluded.end()), excluded.end());
}

bool FeatureConstraint::empty_region() const {
  if (categorical) {
    return equals && std::binary_search(excluded.begin(), excluded.end(), *equals);
  }
  return lower && upper && !(*lower < *upper);
}

bool FeatureConstraint::satisfied_by(double v) const {
  if (categorical) {
    const int c = static_cast<int>(v);
    if (equals && *equals != c) return false;
    return !std::binary_search(excluded.begin(), excluded.end(), c);
  }
  if (lower && !(v > *lower)) return false;
  if (upper && !(v <= *upper)) return false;
  return true;
}

std::vector<Rule> FeatureConstraint::rules() const {
  std::vector<Rule> out;
  if (categorical) {
    if (equals) {
      out.push_back({feature, RuleOp::kEqual, static_cast<double>(*equals)});
    } else {
      for (int c : excluded) out.push_back({feature, RuleOp::kNotEqual, static_cast<double>(c)});
    }
    return out;
  }
  if (lower) out.push_back({feature, RuleOp::kGreater, *lower});
  if (upper) out.push_back({feature, RuleOp::kLessEqual, *upper});
  return out;
}

bool constraint_feasible(const FeatureSchema& feature, const FeatureConstraint& c, double from) {
  if (c.empty_region()) return false;
  if (c.satisfied_by(from)) return true;
  if (feature.immutable()) return false;
  if (c.categorical) {
    const auto count = static_cast<int>(feature.categories.size());
    for (int v = 0; v < count; ++v) {
      if (c.satisfied_by(v) && feature.change_allowed(from, v)) return true;
    }
    return false;
  }
  const bool go_up = c.lower && !(from > *c.lower);
  const double probe = std::nextafter(from, go_up ? std::numeric_limits<double>::infinity()
                                                  : -std::numeric_limits<double>::infinity());
  return feature.change_allowed(from, probe);
}

Rule branch_rule(const SplitTest& test, bool left) {
  if (test.kind == TestKind::kThreshold) {
    return {test.feature, left ? RuleOp::kLessEqual : RuleOp::kGreater, test.threshold};
  }
  return {test.feature, left ? RuleOp::kEqual : RuleOp::kNotEqual, static_cast<double>(test.category)};
}

FactLeaf locate_fact_leaf(const SurrogateTree& tree, const Instance& x, int fact_label) {
  const int leaf = tree.leaf_of(x);
  return {leaf, tree.node(leaf).label != fact_label};
}

ContrastGraph build_graph(const SurrogateTree& tree, const Instance& x, const Schema& schema,
                          int fact_label, int contrast_label) {
  check_conforms(schema, x);
  ContrastGraph g;
  g.anchor = x;
  g.fact_label = fact_label;
  g.contrast_label = contrast_label;
  const auto n = tree.node_count();
  g.kinds.resize(n);
  g.tree_parent.resize(n);
  g.entry_rule.resize(n);
  g.out_edges.resize(n);

  for (std::size_t v = 0; v < n; ++v) {
    const auto& node = tree.node(static_cast<int>(v));
    g.tree_parent[v] = node.parent;
    if (!node.is_leaf()) {
      g.kinds[v] = VertexKind::kInternal;
    } else if (node.label == contrast_label) {
      g.kinds[v] = VertexKind::kContrastLeaf;
    } else if (node.label == fact_label) {
      g.kinds[v] = VertexKind::kFactLeaf;
    } else {
      g.kinds[v] = VertexKind::kOtherLeaf;
    }
  }

  // Pre-order walk carrying the merged demand of the region so far.
  auto add_edge = [&](int from, int to, double w, std::optional<Rule> cond) {
    g.out_edges[static_cast<std::size_t>(from)].push_back(static_cast<int>(g.edges.size()));
    g.edges.push_back({from, to, w, cond});
  };
  struct Frame {
    int node;
    std::vector<FeatureConstraint> region;
    bool feasible;
  };
  std::vector<Frame> stack{{0, {}, true}};
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const auto& node = tree.node(frame.node);
    if (node.is_leaf()) continue;
    const auto f = node.test->feature;
    const auto& feature = schema.at(f);
    for (bool left : {true, false}) {
      const int child = left ? node.left : node.right;
      const Rule rule = branch_rule(*node.test, left);
      g.entry_rule[static_cast<std::size_t>(child)] = rule;
      add_edge(child, frame.node, 0.0, std::nullopt);

      auto region = frame.region;
      auto& c = constraint_for(region, f, feature.categorical());
      const bool changed_before = needs_change(c, x[f]);
      c.add(rule);
      bool feasible = frame.feasible && constraint_feasible(feature, c, x[f]);
      if (feasible) {
        const bool charge = !rule.satisfied_by(x[f]) && !changed_before;
        add_edge(frame.node, child, charge ? feature.edit_cost : 0.0, rule);
      }
      stack.push_back({child, std::move(region), feasible});
    }
  }

  const auto located = locate_fact_leaf(tree, x, fact_label);
  g.u_start = located.leaf;
  g.start_disagrees = located.disagrees;
  return g;
}

std::vector<FeatureConstraint> region_constraints(const ContrastGraph& graph, int vertex) {
  std::vector<int> chain;
  for (int v = vertex; v > 0; v = graph.tree_parent[static_cast<std::size_t>(v)]) chain.push_back(v);
  std::vector<FeatureConstraint> out;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const auto& rule = *graph.entry_rule[static_cast<std::size_t>(*it)];
    const bool categorical = rule.op == RuleOp::kEqual || rule.op == RuleOp::kNotEqual;
    constraint_for(out, rule.feature, categorical).add(rule);
  }
  return out;
}

SearchResult shortest_paths(const ContrastGraph& graph) {
  const auto n = graph.vertex_count();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, kInf);
  std::vector<int> via(n, -1);
  std::vector<bool> done(n, false);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  const auto start = static_cast<std::size_t>(graph.u_start);
  dist[start] = 0.0;
  heap.emplace(0.0, graph.u_start);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    const auto ui = static_cast<std::size_t>(u);
    if (done[ui]) continue;
    done[ui] = true;
    for (int e : graph.out_edges[ui]) {
      const auto& edge = graph.edges[static_cast<std::size_t>(e)];
      const auto vi = static_cast<std::size_t>(edge.to);
      const double nd = d + edge.weight;
      if (!done[vi] && nd < dist[vi]) {
        dist[vi] = nd;
        via[vi] = e;
        heap.emplace(nd, edge.to);
      }
    }
  }

  SearchResult result;
  result.start_is_contrast = graph.kinds[start] == VertexKind::kContrastLeaf;
  for (std::size_t v = 0; v < n; ++v) {
    if (graph.kinds[v] != VertexKind::kContrastLeaf || v == start || !done[v]) continue;
    ContrastPath path;
    path.target = static_cast<int>(v);
    for (int u = path.target; u != graph.u_start;) {
      path.vertices.push_back(u);
      u = graph.edges[static_cast<std::size_t>(via[static_cast<std::size_t>(u)])].from;
    }
    path.vertices.push_back(graph.u_start);
    std::reverse(path.vertices.begin(), path.vertices.end());
    // Sum in traversal order so equal paths always give identical costs.
    for (std::size_t i = 1; i < path.vertices.size(); ++i) {
      path.cost += graph.edges[static_cast<std::size_t>(via[static_cast<std::size_t>(path.vertices[i])])].weight;
    }
    for (auto& c : region_constraints(graph, path.target)) {
      const double xv = graph.anchor[c.feature];
      if (c.satisfied_by(xv)) continue;
      path.changes.push_back(c);
    }
    for (const auto& c : path.changes) {
      for (const auto& r : c.rules()) path.rules.push_back(r);
    }
    result.paths.push_back(std::move(path));
  }
  std::sort(result.paths.begin(), result.paths.end(), [](const ContrastPath& a, const ContrastPath& b) {
    if (std::abs(a.cost - b.cost) > kCostTieEps) return a.cost < b.cost;
    if (a.rule_count() != b.rule_count()) return a.rule_count() < b.rule_count();
    return a.target < b.target;
  });
  return result;
}

std::string rule_to_text(const Rule& rule, const Schema& schema) {
  const auto& f = schema.at(rule.feature);
  std::string value = f.categorical() ? f.categories.at(static_cast<std::size_t>(rule.value))
                                      : format_number(rule.value);
  return f.name + " " + to_string(rule.op) + " " + value;
}

nlohmann::json rule_to_json(const Rule& rule, const Schema& schema) {
  const auto& f = schema.at(rule.feature);
  nlohmann::json out = {{"feature", f.name}, {"feature_index", rule.feature}, {"op", to_string(rule.op)}};
  if (f.categorical()) {
    out["value"] = f.categories.at(static_cast<std::size_t>(rule.value));
  } else {
    out["value"] = rule.value;
  }
  return out;
}

nlohmann::json path_to_json(const ContrastPath& path, const Schema& schema) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : path.rules) rules.push_back(rule_to_json(r, schema));
  return {{"target", path.target}, {"cost", path.cost}, {"vertices", path.vertices}, {"rules", std::move(rules)}};
}

}  // namespace ctrex
