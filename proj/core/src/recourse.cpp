#include "ctrex/recourse.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "ctrex/random.hpp"

namespace ctrex {

namespace {

constexpr int kDocumentVersion = 1;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double realize_numeric(const FeatureSchema& f, const FeatureConstraint& c, double x, double sigma,
                       double m, std::mt19937_64& rng) {
  // x violates the constraint, so it lies at/below the lower bound or above the upper one.
  const bool up = c.lower && !(x > *c.lower);
  const double margin = std::abs(standard_normal(rng)) * sigma / m;
  double v = up ? *c.lower + margin : *c.upper - margin;
  if (up && c.upper) v = std::min(v, *c.upper);
  v = std::clamp(v, f.observed_min, f.observed_max);
  if (c.satisfied_by(v) && f.change_allowed(x, v)) return v;

  const double boundary = up ? std::nextafter(*c.lower, std::numeric_limits<double>::infinity()) : *c.upper;
  if (c.satisfied_by(boundary) && f.change_allowed(x, boundary) && boundary >= f.observed_min &&
      boundary <= f.observed_max) {
    return boundary;
  }
  throw InfeasibleRealization("feature '" + f.name + "': no value inside the observed range [" +
                              std::to_string(f.observed_min) + ", " + std::to_string(f.observed_max) +
                              "] satisfies the rule");
}

double realize_categorical(const FeatureSchema& f, const FeatureConstraint& c, double x) {
  if (c.equals) {
    const double v = *c.equals;
    if (c.satisfied_by(v) && f.change_allowed(x, v)) return v;
  } else {
    for (std::size_t k = 0; k < f.categories.size(); ++k) {
      const double v = static_cast<double>(k);
      if (c.satisfied_by(v) && f.change_allowed(x, v)) return v;
    }
  }
  throw InfeasibleRealization("feature '" + f.name + "': no allowed category satisfies the rule");
}

std::vector<double> neighborhood_sigma(const NeighborSet& set, const Schema& schema) {
  std::vector<double> sigma(schema.size(), 0.0);
  const double n = static_cast<double>(set.members.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (!schema[f].numeric() || set.members.empty()) continue;
    double mean = 0.0;
    for (const auto& m : set.members) mean += m.instance[f];
    mean /= n;
    double var = 0.0;
    for (const auto& m : set.members) var += (m.instance[f] - mean) * (m.instance[f] - mean);
    sigma[f] = std::sqrt(var / n);
  }
  return sigma;
}

std::vector<double> schema_sigma(const Schema& schema) {
  std::vector<double> sigma;
  for (const auto& f : schema) sigma.push_back(f.sigma);
  return sigma;
}

}  // namespace

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out;
  for (std::size_t i = 0; i < problems.size(); ++i) out += (i ? "; " : "") + problems[i];
  return out;
}

}  // namespace

InstanceError::InstanceError(std::vector<std::string> problems)
    : DataError(join_problems(problems)), problems_(std::move(problems)) {}

void RecourseConfig::validate() const {
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("k must be even and at least 2");
  if (max_search < 1) throw std::invalid_argument("max_search must be at least 1");
  if (!(margin_divisor > 0.0)) throw std::invalid_argument("margin divisor m must be positive");
  if (max_depth < 0) throw std::invalid_argument("max_depth must be non-negative");
}

nlohmann::json RecourseConfig::to_json() const {
  nlohmann::json out = {{"k", k},
                        {"max_search", max_search},
                        {"m", margin_divisor},
                        {"max_depth", max_depth},
                        {"min_samples_leaf", min_samples_leaf},
                        {"prune", prune},
                        {"seed", seed},
                        {"sigma_source", sigma_source == SigmaSource::kTraining ? "training" : "neighborhood"}};
  out["contrast_class"] = contrast_class ? nlohmann::json(*contrast_class) : nlohmann::json(nullptr);
  return out;
}

RecourseConfig RecourseConfig::from_json(const nlohmann::json& doc, RecourseConfig c) {
  if (!doc.is_object()) throw std::invalid_argument("config must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "k") {
      c.k = value.get<std::size_t>();
    } else if (key == "max_search") {
      c.max_search = value.get<int>();
    } else if (key == "m") {
      c.margin_divisor = value.get<double>();
    } else if (key == "max_depth") {
      c.max_depth = value.get<int>();
    } else if (key == "min_samples_leaf") {
      c.min_samples_leaf = value.get<std::size_t>();
    } else if (key == "prune") {
      c.prune = value.get<bool>();
    } else if (key == "seed") {
      c.seed = value.get<std::uint64_t>();
    } else if (key == "contrast_class") {
      c.contrast_class = value.is_null() ? std::nullopt : std::optional<int>(value.get<int>());
    } else if (key == "sigma_source") {
      const auto s = value.get<std::string>();
      if (s == "training") {
        c.sigma_source = SigmaSource::kTraining;
      } else if (s == "neighborhood") {
        c.sigma_source = SigmaSource::kNeighborhood;
      } else {
        throw std::invalid_argument("sigma_source must be 'training' or 'neighborhood'");
      }
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

Instance realize(const Instance& x, const ContrastPath& path, const Schema& schema,
                 std::span<const double> sigma, double m, std::mt19937_64& rng) {
  if (!(m > 0.0)) throw std::invalid_argument("margin divisor m must be positive");
  if (sigma.size() != schema.size()) throw std::invalid_argument("sigma has the wrong width");
  Instance out = x;
  out.id.reset();
  for (const auto& c : path.changes) {
    const auto& f = schema.at(c.feature);
    if (f.immutable()) throw InfeasibleRealization("feature '" + f.name + "' is immutable");
    out[c.feature] = f.numeric() ? realize_numeric(f, c, x[c.feature], sigma[c.feature], m, rng)
                                 : realize_categorical(f, c, x[c.feature]);
  }
  return out;
}

Instance realize(const Instance& x, const ContrastPath& path, const Schema& schema, double m,
                 std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  const auto sigma = schema_sigma(schema);
  return realize(x, path, schema, sigma, m, rng);
}

nlohmann::json Warnings::to_json() const {
  return {{"surrogate_disagrees", surrogate_disagrees},
          {"start_is_contrast", start_is_contrast},
          {"neighborhood_shortfall", neighborhood_shortfall},
          {"not_flipped", not_flipped}};
}

nlohmann::json instance_to_json(const Instance& x, const Schema& schema) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& f = schema[i];
    if (f.categorical()) {
      out[f.name] = f.categories.at(static_cast<std::size_t>(x[i]));
    } else {
      out[f.name] = x[i];
    }
  }
  return out;
}

Instance instance_from_json(const nlohmann::json& doc, const Schema& schema) {
  if (!doc.is_object()) throw DataError("anchor must be an object of feature values");
  std::vector<std::string> problems;
  Instance x;
  x.values.assign(schema.size(), 0.0);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& f = schema[i];
    auto it = doc.find(f.name);
    if (it == doc.end()) {
      problems.push_back(f.name + ": missing");
      continue;
    }
    if (f.numeric()) {
      if (!it->is_number()) {
        problems.push_back(f.name + ": expected a number");
      } else if (!std::isfinite(it->get<double>())) {
        problems.push_back(f.name + ": not finite");
      } else {
        x[i] = it->get<double>();
      }
      continue;
    }
    if (it->is_string()) {
      const auto name = it->get<std::string>();
      auto c = std::find(f.categories.begin(), f.categories.end(), name);
      if (c == f.categories.end()) {
        problems.push_back(f.name + ": unknown category '" + name + "'");
      } else {
        x[i] = static_cast<double>(c - f.categories.begin());
      }
    } else {
      problems.push_back(f.name + ": expected a category name");
    }
  }
  for (const auto& [key, value] : doc.items()) {
    if (!find_feature(schema, key)) problems.push_back(key + ": unknown feature");
  }
  if (!problems.empty()) throw InstanceError(std::move(problems));
  return x;
}

nlohmann::json counterfactual_to_json(const Counterfactual& cf, const Schema& schema) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : cf.path.rules) rules.push_back(rule_to_json(r, schema));
  return {{"x_prime", instance_to_json(cf.x_prime, schema)},
          {"target", cf.path.target},
          {"cost", cf.path.cost},
          {"rules", std::move(rules)},
          {"flipped", cf.flipped},
          {"predicted_label", cf.predicted_label},
          {"attempts", cf.attempts},
          {"warnings", cf.warnings.to_json()},
          {"elapsed_s", cf.elapsed_s},
          {"metrics", cf.metrics.to_json()}};
}

nlohmann::json explanation_to_json(const Explanation& e, const Schema& schema, bool include_timing) {
  auto strip = [include_timing](nlohmann::json cf) {
    if (!include_timing) {
      cf.erase("elapsed_s");
      cf["metrics"].erase("latency_s");
    }
    return cf;
  };
  nlohmann::json diverse = nlohmann::json::array();
  for (const auto& cf : e.diverse) diverse.push_back(strip(counterfactual_to_json(cf, schema)));
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& p : e.ranked_paths) paths.push_back(path_to_json(p, schema));
  nlohmann::json out = {{"schema_version", kDocumentVersion},
                        {"anchor", instance_to_json(e.anchor, schema)},
                        {"fact_label", e.fact_label},
                        {"contrast_label", e.contrast_label},
                        {"best", strip(counterfactual_to_json(e.best, schema))},
                        {"diverse", std::move(diverse)},
                        {"ranked_paths", std::move(paths)},
                        {"fidelity", e.fidelity},
                        {"tree", {{"nodes", e.tree_nodes}, {"depth", e.tree_depth}}},
                        {"neighbors", e.neighbors},
                        {"attempts", e.attempts}};
  if (include_timing) out["elapsed_s"] = e.elapsed_s;
  return out;
}

bool Overrides::empty() const {
  return edit_cost.empty() && mutability.empty() && !margin_divisor && !contrast_class;
}

Overrides Overrides::from_json(const nlohmann::json& doc) {
  Overrides o;
  if (doc.is_null()) return o;
  if (!doc.is_object()) throw DataError("overrides must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "edit_cost") {
      for (const auto& [name, cost] : value.items()) {
        if (!cost.is_number()) throw DataError("edit_cost." + name + ": expected a number");
        o.edit_cost[name] = cost.get<double>();
      }
    } else if (key == "mutability") {
      for (const auto& [name, entry] : value.items()) {
        MutabilityOverride m;
        if (entry.is_string()) {
          m.mutability = parse_mutability(entry.get<std::string>());
        } else if (entry.is_object()) {
          m.mutability = parse_mutability(entry.at("mutability").get<std::string>());
          if (entry.contains("direction")) m.direction = parse_direction(entry["direction"].get<std::string>());
        } else {
          throw DataError("mutability." + name + ": expected a string or object");
        }
        o.mutability[name] = m;
      }
    } else if (key == "m") {
      o.margin_divisor = value.get<double>();
    } else if (key == "contrast_class") {
      if (!value.is_null()) o.contrast_class = value.get<int>();
    } else {
      throw DataError("unknown override key '" + key + "'");
    }
  }
  return o;
}

nlohmann::json Overrides::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  if (!edit_cost.empty()) out["edit_cost"] = edit_cost;
  if (!mutability.empty()) {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [name, entry] : mutability) {
      m[name] = {{"mutability", to_string(entry.mutability)}, {"direction", to_string(entry.direction)}};
    }
    out["mutability"] = std::move(m);
  }
  if (margin_divisor) out["m"] = *margin_divisor;
  if (contrast_class) out["contrast_class"] = *contrast_class;
  return out;
}

Schema apply_overrides(const Schema& schema, const Overrides& overrides) {
  Schema out = schema;
  auto lookup = [&](const std::string& name) -> FeatureSchema& {
    auto idx = find_feature(out, name);
    if (!idx) throw DataError("override names unknown feature '" + name + "'");
    return out[*idx];
  };
  for (const auto& [name, cost] : overrides.edit_cost) {
    auto& f = lookup(name);
    f.edit_cost = cost;
    f.validate();
  }
  for (const auto& [name, entry] : overrides.mutability) {
    auto& f = lookup(name);
    f.mutability = entry.mutability;
    f.direction = entry.mutability == Mutability::kSemiImmutable ? entry.direction : Direction::kNone;
    f.validate();
  }
  return out;
}

ExplainSession::ExplainSession(const BlackBox& model, const PoolIndex& index, const VaeModel& vae,
                               RecourseConfig config)
    : model_(model),
      index_(index),
      vae_(vae),
      config_(std::move(config)),
      base_schema_(index.pool().schema()),
      schema_(base_schema_) {
  config_.validate();
}

Explanation ExplainSession::explain(const Instance& x) {
  check_conforms(schema_, x);
  anchor_ = x;
  fact_ = model_.predict_label(x);
  contrast_ = resolve_contrast(model_.class_count(), fact_, config_.contrast_class);
  neighbors_.reset();
  tree_.reset();
  return run(true, true);
}

Explanation ExplainSession::explain(const Instance& x, const Overrides& overrides) {
  check_conforms(schema_, x);
  // Contrast resolution needs the fact label of the new anchor.
  anchor_ = x;
  fact_ = model_.predict_label(x);
  adjust(overrides);
  return explain(x);
}

std::pair<bool, bool> ExplainSession::adjust(const Overrides& overrides) {
  Schema next = apply_overrides(schema_, overrides);
  RecourseConfig next_config = config_;
  if (overrides.margin_divisor) next_config.margin_divisor = *overrides.margin_divisor;
  next_config.validate();
  int contrast = contrast_;
  bool contrast_changed = false;
  if (overrides.contrast_class) {
    contrast = resolve_contrast(model_.class_count(), fact_, overrides.contrast_class);
    next_config.contrast_class = contrast;
    contrast_changed = contrast != contrast_;
  }
  const bool exclusion_changed = immutable_features(next) != immutable_features(schema_);
  schema_ = std::move(next);
  config_ = next_config;
  contrast_ = contrast;
  return {contrast_changed, exclusion_changed};
}

Explanation ExplainSession::what_if(const Overrides& overrides) {
  if (!anchor_) throw std::logic_error("what_if needs a prior explain on this session");
  const auto [contrast_changed, exclusion_changed] = adjust(overrides);
  const bool resample = contrast_changed || !neighbors_;
  return run(resample, resample || exclusion_changed || !tree_);
}

Explanation ExplainSession::run(bool resample, bool refit) {
  const auto start = Clock::now();
  const Instance& x = *anchor_;
  if (resample) {
    neighbors_ = sample_neighbors(x, index_, vae_, config_.k, fact_, contrast_);
    ++counts_.neighborhoods;
  }
  if (resample || sigma_.empty()) {
    sigma_ = config_.sigma_source == SigmaSource::kTraining ? schema_sigma(base_schema_)
                                                            : neighborhood_sigma(*neighbors_, base_schema_);
  }
  if (refit) {
    TreeConfig tc;
    tc.max_depth = config_.max_depth;
    tc.min_samples_leaf = config_.min_samples_leaf;
    auto tree = fit_tree(*neighbors_, schema_, tc);
    if (config_.prune) tree = prune(tree, *neighbors_);
    tree_ = std::move(tree);
    ++counts_.trees;
  }
  const auto graph = build_graph(*tree_, x, schema_, fact_, contrast_);
  ++counts_.graphs;
  auto search = shortest_paths(graph);
  if (search.paths.empty()) {
    throw NoPathError("no contrast leaf is reachable from the anchor's leaf under the feature constraints");
  }

  Warnings base;
  base.surrogate_disagrees = graph.start_disagrees;
  base.start_is_contrast = search.start_is_contrast;
  base.neighborhood_shortfall = neighbors_->has_shortfall();

  Explanation e;
  e.anchor = x;
  e.fact_label = fact_;
  e.contrast_label = contrast_;
  e.fidelity = fidelity(*tree_, *neighbors_);
  e.tree_nodes = tree_->node_count();
  e.tree_depth = tree_->depth();
  e.neighbors = neighbors_->size();

  // Round one visits every ranked path once; later rounds re-realize with
  // fresh noise until something flips or the budget runs out.
  std::mt19937_64 rng(config_.seed);
  std::optional<Counterfactual> best, last;
  std::optional<std::string> infeasible;
  int attempts = 0;
  for (int round = 0; attempts < config_.max_search && (round == 0 || !best); ++round) {
    for (const auto& path : search.paths) {
      if (attempts >= config_.max_search || (round > 0 && best)) break;
      ++attempts;
      Counterfactual cf;
      try {
        cf.x_prime = realize(x, path, schema_, sigma_, config_.margin_divisor, rng);
      } catch (const InfeasibleRealization& err) {
        infeasible = err.what();
        continue;
      }
      cf.path = path;
      cf.predicted_label = model_.predict_label(cf.x_prime);
      cf.flipped = cf.predicted_label == contrast_;
      cf.attempts = attempts;
      cf.warnings = base;
      cf.elapsed_s = seconds_since(start);
      if (cf.flipped) {
        if (!best) best = cf;
        const bool seen = std::any_of(e.diverse.begin(), e.diverse.end(),
                                      [&](const Counterfactual& d) { return d.path.rules == cf.path.rules; });
        if (!seen) e.diverse.push_back(cf);
      }
      last = std::move(cf);
    }
  }
  if (!last) throw InfeasibleRealization("no ranked path could be realized: " + infeasible.value_or("?"));
  if (best) {
    e.best = *best;
  } else {
    e.best = *last;
    e.best.warnings.not_flipped = true;
  }
  e.attempts = attempts;
  e.elapsed_s = seconds_since(start);
  e.ranked_paths = std::move(search.paths);

  auto attach = [&](Counterfactual& cf) {
    cf.metrics = evaluate_counterfactual(x, cf.x_prime, model_, index_, vae_, schema_, e.elapsed_s);
    cf.metrics.flipped = cf.flipped;
  };
  attach(e.best);
  for (auto& cf : e.diverse) attach(cf);
  return e;
}

Explanation explain(const Instance& x, const BlackBox& model, const Dataset& pool, const VaeModel& vae,
                    const RecourseConfig& config) {
  PoolIndex index(pool, model, vae);
  ExplainSession session(model, index, vae, config);
  return session.explain(x);
}

}  // namespace ctrex
