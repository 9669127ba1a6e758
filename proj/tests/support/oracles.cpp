#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace ctrex::oracle {

namespace {

std::vector<double> decode_numeric(const Encoder& enc, std::span<const double> encoded) {
  const auto& schema = enc.schema();
  std::vector<double> raw(schema.size(), 0.0);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto off = enc.offset(i);
    if (schema[i].categorical()) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < schema[i].categories.size(); ++c) {
        if (encoded[off + c] > encoded[off + best]) best = c;
      }
      raw[i] = static_cast<double>(best);
    } else {
      raw[i] = encoded[off] * enc.normalization().stddev[i] + enc.normalization().mean[i];
    }
  }
  return raw;
}

double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

int randint(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

LinearRule::LinearRule(Encoder encoder, std::vector<double> weights, double bias)
    : BlackBox(std::move(encoder)), w_(std::move(weights)), b_(bias) {}

std::vector<double> LinearRule::predict_proba(std::span<const double> encoded) const {
  double s = b_;
  for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * encoded[encoder().offset(i)];
  const double p = 1.0 / (1.0 + std::exp(-s));
  return {1.0 - p, p};
}

PredicateModel::PredicateModel(Encoder encoder, std::function<int(const std::vector<double>&)> rule)
    : BlackBox(std::move(encoder)), rule_(std::move(rule)) {}

std::vector<double> PredicateModel::predict_proba(std::span<const double> encoded) const {
  const int y = rule_(decode_numeric(encoder(), encoded));
  return y ? std::vector<double>{0.1, 0.9} : std::vector<double>{0.9, 0.1};
}

Schema random_schema(std::mt19937_64& rng, std::size_t numeric, std::size_t categorical, bool annotate) {
  Schema s;
  for (std::size_t i = 0; i < numeric; ++i) {
    FeatureSchema f;
    f.name = "n" + std::to_string(i);
    f.observed_min = -3.0;
    f.observed_max = 3.0;
    f.sigma = 1.0;
    if (annotate) {
      switch (randint(rng, 0, 3)) {
        case 0:
          f.mutability = Mutability::kImmutable;
          break;
        case 1:
          f.mutability = Mutability::kSemiImmutable;
          f.direction = randint(rng, 0, 1) ? Direction::kIncreaseOnly : Direction::kDecreaseOnly;
          break;
        default:
          break;
      }
      f.edit_cost = std::round(uniform(rng, 0.5, 3.0) * 4.0) / 4.0;
    }
    s.push_back(f);
  }
  for (std::size_t i = 0; i < categorical; ++i) {
    FeatureSchema f;
    f.name = "c" + std::to_string(i);
    f.kind = FeatureKind::kCategorical;
    const int k = randint(rng, 2, 4);
    for (int c = 0; c < k; ++c) f.categories.push_back("v" + std::to_string(c));
    f.observed_max = k - 1;
    if (annotate) {
      if (randint(rng, 0, 3) == 0) f.mutability = Mutability::kImmutable;
      f.edit_cost = std::round(uniform(rng, 0.5, 3.0) * 4.0) / 4.0;
    }
    s.push_back(f);
  }
  return s;
}

Instance random_instance(std::mt19937_64& rng, const Schema& schema) {
  Instance x;
  for (const auto& f : schema) {
    if (f.categorical()) {
      x.values.push_back(randint(rng, 0, static_cast<int>(f.categories.size()) - 1));
    } else {
      // Quarter steps so that ties with thresholds happen.
      x.values.push_back(std::round(uniform(rng, -3.0, 3.0) * 4.0) / 4.0);
    }
  }
  return x;
}

SurrogateTree random_tree(std::mt19937_64& rng, const Schema& schema, int max_depth) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!schema[i].immutable()) usable.push_back(i);
  }
  std::vector<TreeNode> nodes;
  std::function<int(int, int)> grow = [&](int parent, int depth) -> int {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[id].parent = parent;
    nodes[id].depth = depth;
    nodes[id].counts = {0, 0};
    const bool split = !usable.empty() && depth < max_depth && (depth < 2 || uniform(rng, 0, 1) < 0.7);
    if (!split) {
      const int label = randint(rng, 0, 1);
      nodes[id].label = label;
      nodes[id].counts[label] = 1;
      nodes[id].support = 1;
      return id;
    }
    SplitTest t;
    t.feature = usable[static_cast<std::size_t>(randint(rng, 0, static_cast<int>(usable.size()) - 1))];
    if (schema[t.feature].categorical()) {
      t.kind = TestKind::kCategory;
      t.category = randint(rng, 0, static_cast<int>(schema[t.feature].categories.size()) - 1);
    } else {
      t.threshold = std::round(uniform(rng, -2.5, 2.5) * 8.0) / 8.0 + 0.0625;
    }
    nodes[id].test = t;
    const int l = grow(id, depth + 1);
    const int r = grow(id, depth + 1);
    nodes[id].left = l;
    nodes[id].right = r;
    nodes[id].counts = {nodes[l].counts[0] + nodes[r].counts[0], nodes[l].counts[1] + nodes[r].counts[1]};
    nodes[id].label = nodes[id].counts[1] > nodes[id].counts[0] ? 1 : 0;
    nodes[id].support = nodes[id].counts[0] + nodes[id].counts[1];
    return id;
  };
  grow(-1, 0);
  TreeConfig config;
  config.max_depth = max_depth;
  return SurrogateTree(std::move(nodes), 2, config, immutable_features(schema));
}

std::vector<EnumeratedPath> enumerate_paths(const SurrogateTree& tree, const Instance& x, const Schema& schema,
                                            int contrast_label) {
  // x's leaf by walking the tests directly.
  int start = 0;
  while (!tree.node(start).is_leaf()) {
    const auto& t = *tree.node(start).test;
    const double v = x[t.feature];
    const bool left = t.kind == TestKind::kThreshold ? v <= t.threshold : v == t.category;
    start = left ? tree.node(start).left : tree.node(start).right;
  }

  std::vector<EnumeratedPath> out;
  for (std::size_t leaf = 0; leaf < tree.node_count(); ++leaf) {
    const auto& node = tree.node(static_cast<int>(leaf));
    if (!node.is_leaf() || static_cast<int>(leaf) == start || node.label != contrast_label) continue;

    // Interval / category set per feature along the root path.
    const double inf = std::numeric_limits<double>::infinity();
    std::map<std::size_t, std::pair<double, double>> box;   // (lo, hi]
    std::map<std::size_t, std::set<int>> allowed;
    std::map<std::size_t, int> bound_count;
    std::map<std::size_t, std::set<int>> excluded;
    std::map<std::size_t, std::optional<int>> equal;
    for (int child = static_cast<int>(leaf); tree.node(child).parent >= 0; child = tree.node(child).parent) {
      const auto& p = tree.node(tree.node(child).parent);
      const auto& t = *p.test;
      const bool left = p.left == child;
      if (t.kind == TestKind::kThreshold) {
        auto& b = box.try_emplace(t.feature, -inf, inf).first->second;
        if (left) b.second = std::min(b.second, t.threshold);
        else b.first = std::max(b.first, t.threshold);
      } else {
        auto [it, fresh] = allowed.try_emplace(t.feature);
        auto& a = it->second;
        if (fresh) {
          for (int c = 0; c < static_cast<int>(schema[t.feature].categories.size()); ++c) a.insert(c);
        }
        if (left) {
          std::set<int> only;
          if (a.count(t.category)) only.insert(t.category);
          a = only;
          if (!equal[t.feature]) equal[t.feature] = t.category;
        } else {
          a.erase(t.category);
          excluded[t.feature].insert(t.category);
        }
      }
    }

    bool reachable = true;
    double cost = 0.0;
    std::size_t rules = 0;
    for (const auto& [f, b] : box) {
      const auto& fs = schema[f];
      const double v = x[f];
      if (!(b.first < b.second)) {
        reachable = false;
        break;
      }
      if (v > b.first && v <= b.second) continue;
      bool ok = true;
      if (fs.immutable()) ok = false;
      if (fs.mutability == Mutability::kSemiImmutable) {
        ok = fs.direction == Direction::kIncreaseOnly ? b.second > v : b.first < v;
      }
      if (!ok) {
        reachable = false;
        break;
      }
      cost += fs.edit_cost;
      rules += (b.first > -inf) + (b.second < inf);
    }
    for (const auto& [f, a] : allowed) {
      if (!reachable) break;
      const int v = static_cast<int>(x[f]);
      if (a.empty()) {
        reachable = false;
        break;
      }
      if (a.count(v)) continue;
      if (schema[f].immutable()) {
        reachable = false;
        break;
      }
      cost += schema[f].edit_cost;
      rules += equal[f] ? 1 : excluded[f].size();
    }
    if (reachable) out.push_back({static_cast<int>(leaf), cost, rules});
  }
  std::sort(out.begin(), out.end(), [](const EnumeratedPath& a, const EnumeratedPath& b) {
    if (std::abs(a.cost - b.cost) > 1e-12) return a.cost < b.cost;
    if (a.rule_count != b.rule_count) return a.rule_count < b.rule_count;
    return a.target < b.target;
  });
  return out;
}

namespace {

double entropy_bits(const std::vector<double>& counts) {
  double n = 0.0;
  for (double c : counts) n += c;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0) h -= (c / n) * std::log(c / n) / std::log(2.0);
  }
  return h;
}

}  // namespace

std::optional<OracleSplit> exhaustive_split(const std::vector<Instance>& rows, const std::vector<int>& labels,
                                            const Schema& schema, std::size_t class_count,
                                            std::size_t min_samples_leaf) {
  const double n = static_cast<double>(rows.size());
  std::vector<double> all(class_count, 0.0);
  for (int y : labels) all[static_cast<std::size_t>(y)] += 1.0;
  const double parent = entropy_bits(all);

  std::optional<OracleSplit> best;
  auto consider = [&](OracleSplit s, const std::vector<bool>& goes_left) {
    std::vector<double> l(class_count, 0.0), r(class_count, 0.0);
    double nl = 0, nr = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (goes_left[i]) {
        l[static_cast<std::size_t>(labels[i])] += 1;
        nl += 1;
      } else {
        r[static_cast<std::size_t>(labels[i])] += 1;
        nr += 1;
      }
    }
    if (nl < static_cast<double>(min_samples_leaf) || nr < static_cast<double>(min_samples_leaf)) return;
    if (nl == 0 || nr == 0) return;
    s.gain = parent - (nl / n) * entropy_bits(l) - (nr / n) * entropy_bits(r);
    if (s.gain <= 1e-12) return;
    if (!best || s.gain > best->gain + 1e-12) best = s;
  };

  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (schema[f].immutable()) continue;
    if (schema[f].categorical()) {
      for (int c = 0; c < static_cast<int>(schema[f].categories.size()); ++c) {
        std::vector<bool> left(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) left[i] = rows[i][f] == c;
        OracleSplit s;
        s.feature = f;
        s.categorical = true;
        s.category = c;
        consider(s, left);
      }
      continue;
    }
    std::vector<double> values;
    for (const auto& r : rows) values.push_back(r[f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      double t = values[k] + (values[k + 1] - values[k]) / 2.0;
      if (!(t < values[k + 1])) t = values[k];
      std::vector<bool> left(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) left[i] = rows[i][f] <= t;
      OracleSplit s;
      s.feature = f;
      s.threshold = t;
      consider(s, left);
    }
  }
  return best;
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> theta, double h) {
  std::vector<double> g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + h;
    const double up = f(theta);
    theta[i] = keep - h;
    const double down = f(theta);
    theta[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-300});
}

std::size_t l0(const Instance& x, const Instance& y, const Schema& schema) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) n += std::abs(x[i] - y[i]) > 1e-9;
  return n;
}

double l2(const Instance& x, const Instance& y, const Schema& schema, const Normalization& norm) {
  double s = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].categorical()) {
      s += x[i] != y[i] ? 1.0 : 0.0;
    } else {
      const double d = (x[i] - y[i]) / norm.stddev[i];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

double latent_dist(const VaeModel& vae, const Instance& x, const Instance& y) {
  const auto a = vae.encode(x).z;
  const auto b = vae.encode(y).z;
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::size_t redundancy(const Instance& x, const Instance& y, const BlackBox& model, const Schema& schema) {
  const int label = model.predict_label(y);
  std::size_t n = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (std::abs(x[i] - y[i]) <= 1e-9) continue;
    Instance back = y;
    back[i] = x[i];
    n += model.predict_label(back) == label;
  }
  return n;
}

std::vector<std::size_t> knn_by_label(const Instance& x, const Dataset& pool, const std::vector<int>& labels,
                                      int label, const VaeModel& vae, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (label >= 0 && labels[i] != label) continue;
    if (pool.row(i) == x) continue;
    d.emplace_back(latent_dist(vae, x, pool.row(i)), i);
  }
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(k, d.size()); ++i) out.push_back(d[i].second);
  return out;
}

double ynn(const Instance& y, const Dataset& pool, const BlackBox& model, const VaeModel& vae, std::size_t k) {
  const int label = model.predict_label(y);
  std::vector<int> labels;
  for (const auto& r : pool.rows()) labels.push_back(model.predict_label(r));
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < pool.size(); ++i) d.emplace_back(latent_dist(vae, y, pool.row(i)), i);
  std::sort(d.begin(), d.end());
  std::size_t same = 0;
  for (std::size_t i = 0; i < k; ++i) same += labels[d[i].second] == label;
  return static_cast<double>(same) / static_cast<double>(k);
}

std::pair<std::size_t, std::size_t> count_violations(const Instance& x, const Instance& y, const Schema& schema) {
  std::size_t imm = 0, dir = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (std::abs(x[i] - y[i]) <= 1e-9) continue;
    if (schema[i].mutability == Mutability::kImmutable) ++imm;
    if (schema[i].mutability == Mutability::kSemiImmutable) {
      const bool up = y[i] > x[i];
      if (up != (schema[i].direction == Direction::kIncreaseOnly)) ++dir;
    }
  }
  return {imm, dir};
}

nlohmann::json strip_timing(nlohmann::json doc) {
  if (doc.is_object()) {
    doc.erase("elapsed_s");
    doc.erase("latency_s");
    for (auto& [k, v] : doc.items()) v = strip_timing(v);
  } else if (doc.is_array()) {
    for (auto& v : doc) v = strip_timing(v);
  }
  return doc;
}

}  // namespace ctrex::oracle
