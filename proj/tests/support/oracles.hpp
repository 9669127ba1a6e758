#pragma once

// Independent reference implementations used to check the library. These are
// deliberately naive (exhaustive scans, direct loops) and share no code with
// the code under test beyond the data types.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrex/blackbox.hpp"
#include "ctrex/contrast_graph.hpp"
#include "ctrex/dataset.hpp"
#include "ctrex/latent.hpp"
#include "ctrex/surrogate.hpp"

namespace ctrex::oracle {

// ---- black boxes with known decision rules ----

/// Class 1 iff w . normalized(x) + b > 0, over numeric features only.
class LinearRule final : public BlackBox {
 public:
  LinearRule(Encoder encoder, std::vector<double> weights, double bias);
  std::vector<double> predict_proba(std::span<const double> encoded) const override;
  std::size_t class_count() const override { return 2; }
  std::string metadata() const override { return "linear-rule"; }

 private:
  std::vector<double> w_;
  double b_;
};

/// Class from an arbitrary predicate on raw values (decoded from the encoding).
class PredicateModel final : public BlackBox {
 public:
  PredicateModel(Encoder encoder, std::function<int(const std::vector<double>&)> rule);
  std::vector<double> predict_proba(std::span<const double> encoded) const override;
  std::size_t class_count() const override { return 2; }
  std::string metadata() const override { return "predicate"; }

 private:
  std::function<int(const std::vector<double>&)> rule_;
};

// ---- random structures ----

/// Schema with `numeric` numeric and `categorical` categorical features and
/// random mutability/direction/cost annotations. Observed stats are left at
/// [-3, 3] for numerics.
Schema random_schema(std::mt19937_64& rng, std::size_t numeric, std::size_t categorical, bool annotate);

Instance random_instance(std::mt19937_64& rng, const Schema& schema);

/// Random tree arena of depth <= max_depth whose tests use non-immutable
/// features; leaf labels are random among 2 classes.
SurrogateTree random_tree(std::mt19937_64& rng, const Schema& schema, int max_depth);

// ---- contrast paths by enumeration ----

struct EnumeratedPath {
  int target = 0;
  double cost = 0.0;
  std::size_t rule_count = 0;
};

/// Every contrast leaf other than x's own leaf whose region is reachable from
/// x under the schema's constraints, with the summed edit cost of the
/// features x must change, sorted by (cost, rule count, target).
std::vector<EnumeratedPath> enumerate_paths(const SurrogateTree& tree, const Instance& x, const Schema& schema,
                                            int contrast_label);

// ---- split search by exhaustion ----

struct OracleSplit {
  std::size_t feature = 0;
  bool categorical = false;
  double threshold = 0.0;
  int category = 0;
  double gain = 0.0;
};

/// Tries every feature, every midpoint and every category and keeps the
/// strictly best gain (ties keep the earliest candidate in scan order).
std::optional<OracleSplit> exhaustive_split(const std::vector<Instance>& rows, const std::vector<int>& labels,
                                            const Schema& schema, std::size_t class_count,
                                            std::size_t min_samples_leaf);

// ---- gradients ----

/// Central differences of `f` at `theta` with step h.
std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> theta, double h = 1e-5);

/// ||a - b|| / max(||a||, ||b||, tiny).
double relative_error(std::span<const double> a, std::span<const double> b);

// ---- metrics by direct recomputation ----

std::size_t l0(const Instance& x, const Instance& y, const Schema& schema);
double l2(const Instance& x, const Instance& y, const Schema& schema, const Normalization& norm);
double latent_dist(const VaeModel& vae, const Instance& x, const Instance& y);
std::size_t redundancy(const Instance& x, const Instance& y, const BlackBox& model, const Schema& schema);
/// Labels of the k pool rows nearest to y in latent space (ties by row index).
double ynn(const Instance& y, const Dataset& pool, const BlackBox& model, const VaeModel& vae, std::size_t k);
/// Indices of the k nearest rows to x carrying `label`, by full scan.
std::vector<std::size_t> knn_by_label(const Instance& x, const Dataset& pool, const std::vector<int>& labels,
                                      int label, const VaeModel& vae, std::size_t k);
std::pair<std::size_t, std::size_t> count_violations(const Instance& x, const Instance& y, const Schema& schema);

// ---- documents ----

/// Copy of an explanation document with all latency fields removed.
nlohmann::json strip_timing(nlohmann::json doc);

}  // namespace ctrex::oracle
