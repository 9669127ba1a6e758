#include "ctrex/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace ctrex {

namespace {

constexpr double kGainEps = 1e-12;
constexpr int kTreeFormatVersion = 1;

int majority(std::span<const std::size_t> counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return static_cast<int>(best);
}

double split_gain(double parent_entropy, std::span<const std::size_t> left,
                  std::span<const std::size_t> right, std::size_t n_left, std::size_t n_right) {
  const double n = static_cast<double>(n_left + n_right);
  return parent_entropy - (static_cast<double>(n_left) / n) * entropy(left) -
         (static_cast<double>(n_right) / n) * entropy(right);
}

void unpack(const NeighborSet& neighbors, std::vector<int>& labels, std::vector<Instance>& samples) {
  labels.clear();
  samples.clear();
  for (const auto& m : neighbors.members) {
    samples.push_back(m.instance);
    labels.push_back(m.label);
  }
}

// Re-indexes the arena in pre-order starting from `root`, dropping
// unreachable nodes.
std::vector<TreeNode> compact(const std::vector<TreeNode>& arena, int root) {
  std::vector<TreeNode> out;
  struct Frame {
    int old_id;
    int new_parent;
    bool is_left;
  };
  std::vector<Frame> stack{{root, -1, false}};
  while (!stack.empty()) {
    auto [old_id, parent, is_left] = stack.back();
    stack.pop_back();
    TreeNode node = arena[static_cast<std::size_t>(old_id)];
    const int id = static_cast<int>(out.size());
    const int old_left = node.left, old_right = node.right;
    node.parent = parent;
    node.left = node.right = -1;
    out.push_back(node);
    if (parent >= 0) {
      (is_left ? out[static_cast<std::size_t>(parent)].left : out[static_cast<std::size_t>(parent)].right) = id;
    }
    if (old_left >= 0) {
      stack.push_back({old_right, id, false});
      stack.push_back({old_left, id, true});
    }
  }
  return out;
}

std::string format_value(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

std::string describe(const SplitTest& test, const Schema& schema, bool left) {
  const auto& f = schema.at(test.feature);
  if (test.kind == TestKind::kThreshold) {
    return f.name + (left ? " <= " : " > ") + format_value(test.threshold);
  }
  return f.name + (left ? " == " : " != ") + f.categories.at(static_cast<std::size_t>(test.category));
}

}  // namespace

double entropy(std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw SurrogateError("entropy of an empty count vector");
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

SurrogateTree::SurrogateTree(std::vector<TreeNode> nodes, std::size_t class_count, TreeConfig config,
                             std::vector<std::size_t> excluded_features)
    : nodes_(std::move(nodes)),
      class_count_(class_count),
      config_(config),
      excluded_(std::move(excluded_features)) {
  if (nodes_.empty()) throw SurrogateError("tree has no nodes");
  if (class_count_ < 2) throw SurrogateError("tree needs at least 2 classes");
  if (nodes_[0].parent != -1) throw SurrogateError("node 0 must be the root");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    const auto where = "node " + std::to_string(i) + ": ";
    if (n.counts.size() != class_count_) throw SurrogateError(where + "count vector has wrong length");
    if (n.depth > config_.max_depth) throw SurrogateError(where + "exceeds max_depth");
    if ((n.left < 0) != (n.right < 0)) throw SurrogateError(where + "internal nodes need two children");
    if (n.is_leaf()) {
      if (n.test) throw SurrogateError(where + "leaf carries a test");
      if (std::accumulate(n.counts.begin(), n.counts.end(), std::size_t{0}) > 0 &&
          n.label != majority(n.counts)) {
        throw SurrogateError(where + "leaf label is not the majority class");
      }
      continue;
    }
    if (!n.test) throw SurrogateError(where + "internal node without a test");
    if (std::find(excluded_.begin(), excluded_.end(), n.test->feature) != excluded_.end()) {
      throw SurrogateError(where + "tests an excluded feature");
    }
    for (int child : {n.left, n.right}) {
      if (child <= 0 || static_cast<std::size_t>(child) >= nodes_.size()) {
        throw SurrogateError(where + "child id out of range");
      }
      const auto& c = nodes_[static_cast<std::size_t>(child)];
      if (c.parent != static_cast<int>(i) || c.depth != n.depth + 1) {
        throw SurrogateError(where + "inconsistent child link");
      }
    }
  }
}

std::size_t SurrogateTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int SurrogateTree::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

int SurrogateTree::leaf_of(std::span<const double> values) const {
  int id = 0;
  while (!nodes_[static_cast<std::size_t>(id)].is_leaf()) {
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.test->feature >= values.size()) throw SurrogateError("instance shorter than tree features");
    id = n.test->goes_left(values[n.test->feature]) ? n.left : n.right;
  }
  return id;
}

nlohmann::json SurrogateTree::to_json(const Schema& schema) const {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    nlohmann::json entry = {{"id", i},         {"parent", n.parent}, {"depth", n.depth},
                            {"counts", n.counts}, {"label", n.label},   {"support", n.support}};
    if (n.test) {
      const auto& f = schema.at(n.test->feature);
      nlohmann::json test = {{"feature", f.name}, {"feature_index", n.test->feature}};
      if (n.test->kind == TestKind::kThreshold) {
        test["op"] = "<=";
        test["value"] = n.test->threshold;
      } else {
        test["op"] = "==";
        test["value"] = f.categories.at(static_cast<std::size_t>(n.test->category));
        test["category_index"] = n.test->category;
      }
      entry["test"] = std::move(test);
      entry["left"] = n.left;
      entry["right"] = n.right;
    } else {
      entry["test"] = nullptr;
    }
    nodes.push_back(std::move(entry));
  }
  nlohmann::json excluded = nlohmann::json::array();
  for (auto e : excluded_) excluded.push_back(schema.at(e).name);
  return {{"format_version", kTreeFormatVersion},
          {"class_count", class_count_},
          {"max_depth", config_.max_depth},
          {"min_samples_leaf", config_.min_samples_leaf},
          {"excluded_features", std::move(excluded)},
          {"nodes", std::move(nodes)}};
}

std::string SurrogateTree::rule_dump(const Schema& schema) const {
  std::ostringstream out;
  auto emit = [&](auto&& self, int id, int indent) -> void {
    const auto& n = node(id);
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (n.is_leaf()) {
      out << pad << "-> class " << n.label << " [";
      for (std::size_t c = 0; c < n.counts.size(); ++c) out << (c ? " " : "") << n.counts[c];
      out << "] (node " << id << ")\n";
      return;
    }
    out << pad << "if " << describe(*n.test, schema, true) << ":\n";
    self(self, n.left, indent + 1);
    out << pad << "if " << describe(*n.test, schema, false) << ":\n";
    self(self, n.right, indent + 1);
  };
  emit(emit, 0, 0);
  return out.str();
}

std::vector<std::size_t> immutable_features(const Schema& schema) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].immutable()) out.push_back(i);
  }
  return out;
}

std::optional<Split> best_split(std::span<const Instance> samples, std::span<const int> labels,
                                std::span<const std::size_t> subset, const Schema& schema,
                                std::span<const std::size_t> excluded, std::size_t class_count,
                                std::size_t min_samples_leaf) {
  const std::size_t n = subset.size();
  if (n < 2) return std::nullopt;
  const std::size_t min_leaf = std::max<std::size_t>(1, min_samples_leaf);
  std::vector<std::size_t> parent(class_count, 0);
  for (auto i : subset) parent[static_cast<std::size_t>(labels[i])]++;
  const double parent_entropy = entropy(parent);
  if (parent_entropy == 0.0) return std::nullopt;

  std::optional<Split> best;
  auto consider = [&](const SplitTest& test, double gain, std::size_t nl, std::size_t nr) {
    if (gain <= kGainEps) return;
    if (!best || gain > best->gain + kGainEps) best = Split{test, gain, nl, nr};
  };

  std::vector<std::pair<double, int>> column(n);
  std::vector<std::size_t> left(class_count), right(class_count);
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (std::find(excluded.begin(), excluded.end(), f) != excluded.end()) continue;
    if (schema[f].numeric()) {
      for (std::size_t k = 0; k < n; ++k) column[k] = {samples[subset[k]][f], labels[subset[k]]};
      std::sort(column.begin(), column.end());
      std::fill(left.begin(), left.end(), 0);
      right = parent;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto y = static_cast<std::size_t>(column[k].second);
        left[y]++;
        right[y]--;
        const double a = column[k].first, b = column[k + 1].first;
        if (!(a < b)) continue;
        const std::size_t nl = k + 1, nr = n - k - 1;
        if (nl < min_leaf || nr < min_leaf) continue;
        double threshold = a + (b - a) / 2.0;
        if (!(threshold < b)) threshold = a;
        SplitTest test{TestKind::kThreshold, f, threshold, 0};
        consider(test, split_gain(parent_entropy, left, right, nl, nr), nl, nr);
      }
    } else {
      const auto cats = schema[f].categories.size();
      for (std::size_t c = 0; c < cats; ++c) {
        std::fill(left.begin(), left.end(), 0);
        std::size_t nl = 0;
        for (auto i : subset) {
          if (samples[i][f] == static_cast<double>(c)) {
            left[static_cast<std::size_t>(labels[i])]++;
            ++nl;
          }
        }
        const std::size_t nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        for (std::size_t y = 0; y < class_count; ++y) right[y] = parent[y] - left[y];
        SplitTest test{TestKind::kCategory, f, 0.0, static_cast<int>(c)};
        consider(test, split_gain(parent_entropy, left, right, nl, nr), nl, nr);
      }
    }
  }
  return best;
}

SurrogateTree fit_tree(std::span<const Instance> samples, std::span<const int> labels,
                       const Schema& schema, std::size_t class_count, const TreeConfig& config) {
  if (samples.empty() || samples.size() != labels.size()) {
    throw SurrogateError("fit_tree: samples and labels must be non-empty and aligned");
  }
  if (config.max_depth < 0) throw SurrogateError("max_depth must be non-negative");
  const auto excluded = immutable_features(schema);
  if (excluded.size() == schema.size()) {
    throw SurrogateError("every feature is immutable; nothing can be changed");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= class_count) throw SurrogateError("label out of range");
  }
  if (std::all_of(labels.begin(), labels.end(), [&](int y) { return y == labels[0]; })) {
    throw SurrogateError("neighborhood contains a single class");
  }

  std::vector<TreeNode> arena;
  std::vector<std::vector<std::size_t>> rows_of;
  std::vector<std::optional<Split>> pending;

  auto make_node = [&](std::vector<std::size_t> rows, int parent, int depth) {
    TreeNode node;
    node.parent = parent;
    node.depth = depth;
    node.counts.assign(class_count, 0);
    for (auto i : rows) node.counts[static_cast<std::size_t>(labels[i])]++;
    node.label = majority(node.counts);
    node.support = rows.size();
    std::optional<Split> split;
    if (depth < config.max_depth) {
      split = best_split(samples, labels, rows, schema, excluded, class_count, config.min_samples_leaf);
    }
    arena.push_back(std::move(node));
    rows_of.push_back(std::move(rows));
    pending.push_back(split);
    return static_cast<int>(arena.size() - 1);
  };

  std::vector<std::size_t> all(samples.size());
  std::iota(all.begin(), all.end(), 0);
  make_node(std::move(all), -1, 0);

  // Best-first: always expand the leaf with the largest available gain.
  using Entry = std::pair<double, int>;
  auto cmp = [](const Entry& a, const Entry& b) {
    return a.first < b.first || (a.first == b.first && a.second > b.second);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> frontier(cmp);
  if (pending[0]) frontier.emplace(pending[0]->gain, 0);
  std::size_t leaves = 1;
  while (!frontier.empty()) {
    if (config.max_leaves > 0 && leaves >= config.max_leaves) break;
    const int id = frontier.top().second;
    frontier.pop();
    const auto split = *pending[static_cast<std::size_t>(id)];
    std::vector<std::size_t> left_rows, right_rows;
    for (auto i : rows_of[static_cast<std::size_t>(id)]) {
      (split.test.goes_left(samples[i][split.test.feature]) ? left_rows : right_rows).push_back(i);
    }
    const int depth = arena[static_cast<std::size_t>(id)].depth + 1;
    const int l = make_node(std::move(left_rows), id, depth);
    const int r = make_node(std::move(right_rows), id, depth);
    auto& parent = arena[static_cast<std::size_t>(id)];
    parent.test = split.test;
    parent.left = l;
    parent.right = r;
    rows_of[static_cast<std::size_t>(id)].clear();
    ++leaves;
    for (int child : {l, r}) {
      if (pending[static_cast<std::size_t>(child)]) {
        frontier.emplace(pending[static_cast<std::size_t>(child)]->gain, child);
      }
    }
  }
  return SurrogateTree(compact(arena, 0), class_count, config, excluded);
}

SurrogateTree fit_tree(const NeighborSet& neighbors, const Schema& schema, const TreeConfig& config) {
  std::vector<int> labels;
  std::vector<Instance> samples;
  unpack(neighbors, labels, samples);
  const auto classes =
      static_cast<std::size_t>(std::max(neighbors.fact_label, neighbors.contrast_label)) + 1;
  return fit_tree(samples, labels, schema, std::max<std::size_t>(classes, 2), config);
}

double fidelity(const SurrogateTree& tree, const NeighborSet& eval_set) {
  if (eval_set.members.empty()) throw SurrogateError("fidelity on an empty set");
  std::size_t agree = 0;
  for (const auto& m : eval_set.members) agree += tree.predict(m.instance) == m.label;
  return static_cast<double>(agree) / static_cast<double>(eval_set.members.size());
}

double fidelity(const SurrogateTree& tree, const BlackBox& model, const NeighborSet& eval_set) {
  if (eval_set.members.empty()) throw SurrogateError("fidelity on an empty set");
  std::size_t agree = 0;
  for (const auto& m : eval_set.members) agree += tree.predict(m.instance) == model.predict_label(m.instance);
  return static_cast<double>(agree) / static_cast<double>(eval_set.members.size());
}

SurrogateTree prune(const SurrogateTree& tree, std::span<const Instance> samples,
                    std::span<const int> labels) {
  if (samples.size() != labels.size()) throw SurrogateError("prune: samples and labels misaligned");
  std::vector<TreeNode> arena = tree.nodes();
  // Rows of the evaluation set reaching each node.
  std::vector<std::vector<std::size_t>> reach(arena.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    int id = 0;
    reach[0].push_back(i);
    while (!arena[static_cast<std::size_t>(id)].is_leaf()) {
      const auto& n = arena[static_cast<std::size_t>(id)];
      id = n.test->goes_left(samples[i][n.test->feature]) ? n.left : n.right;
      reach[static_cast<std::size_t>(id)].push_back(i);
    }
  }
  // Correct predictions of the (possibly already pruned) subtree at each node.
  std::vector<std::size_t> correct(arena.size(), 0);
  auto visit = [&](auto&& self, int id) -> void {
    auto& n = arena[static_cast<std::size_t>(id)];
    const auto& rows = reach[static_cast<std::size_t>(id)];
    std::size_t as_leaf = 0;
    for (auto i : rows) as_leaf += labels[i] == n.label;
    if (n.is_leaf()) {
      correct[static_cast<std::size_t>(id)] = as_leaf;
      return;
    }
    self(self, n.left);
    self(self, n.right);
    const auto subtree = correct[static_cast<std::size_t>(n.left)] + correct[static_cast<std::size_t>(n.right)];
    if (as_leaf >= subtree) {
      n.left = n.right = -1;
      n.test.reset();
      correct[static_cast<std::size_t>(id)] = as_leaf;
    } else {
      correct[static_cast<std::size_t>(id)] = subtree;
    }
  };
  visit(visit, 0);
  return SurrogateTree(compact(arena, 0), tree.class_count(), tree.config(), tree.excluded_features());
}

SurrogateTree prune(const SurrogateTree& tree, const NeighborSet& eval_set) {
  std::vector<int> labels;
  std::vector<Instance> samples;
  unpack(eval_set, labels, samples);
  return prune(tree, samples, labels);
}

}  // namespace ctrex
