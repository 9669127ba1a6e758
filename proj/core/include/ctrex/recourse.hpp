#pragma once

// Full explanation pipeline and realization of concrete counterfactuals
// from rule paths.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrex/blackbox.hpp"
#include "ctrex/contrast_graph.hpp"
#include "ctrex/dataset.hpp"
#include "ctrex/latent.hpp"
#include "ctrex/metrics.hpp"
#include "ctrex/neighborhood.hpp"
#include "ctrex/surrogate.hpp"

namespace ctrex {

class RecourseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No contrast leaf is reachable under the constraints.
class NoPathError : public RecourseError {
 public:
  using RecourseError::RecourseError;
};

/// No value satisfies a rule within the observed range and direction.
class InfeasibleRealization : public RecourseError {
 public:
  using RecourseError::RecourseError;
};

/// Anchor document problems, one entry per offending field.
class InstanceError : public DataError {
 public:
  explicit InstanceError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class SigmaSource { kTraining, kNeighborhood };

struct RecourseConfig {
  std::size_t k = 1000;
  int max_search = 50;
  /// Margin divisor: noise is N(0, sigma_i / m) as a standard deviation.
  double margin_divisor = 4.0;
  int max_depth = 6;
  std::size_t min_samples_leaf = 5;
  bool prune = true;
  std::uint64_t seed = 0;
  std::optional<int> contrast_class;
  SigmaSource sigma_source = SigmaSource::kTraining;

  void validate() const;
  nlohmann::json to_json() const;
  /// Keys absent from `doc` keep their value in `defaults`.
  static RecourseConfig from_json(const nlohmann::json& doc, RecourseConfig defaults);
};

/// Places x' inside every changed feature's demanded region: numeric bounds
/// get a one-sided |N(0, sigma_i/m)| margin, categoricals are assigned
/// exactly. Untouched features are copied from x. The result is clamped to
/// the observed range and to the allowed direction.
Instance realize(const Instance& x, const ContrastPath& path, const Schema& schema,
                 std::span<const double> sigma, double m, std::mt19937_64& rng);
/// Same, with sigma taken from the schema and a fresh generator.
Instance realize(const Instance& x, const ContrastPath& path, const Schema& schema, double m,
                 std::uint64_t rng_seed);

struct Warnings {
  bool surrogate_disagrees = false;    // x's leaf is not fact-labelled
  bool start_is_contrast = false;      // x's leaf is contrast-labelled
  bool neighborhood_shortfall = false; // a class had fewer than k/2 candidates
  bool not_flipped = false;            // realized, but no attempt flipped

  bool any() const { return surrogate_disagrees || start_is_contrast || neighborhood_shortfall || not_flipped; }
  nlohmann::json to_json() const;
};

struct Counterfactual {
  Instance x_prime;
  ContrastPath path;
  bool flipped = false;
  int predicted_label = 0;
  int attempts = 0;
  Warnings warnings;
  double elapsed_s = 0.0;
  MetricsRecord metrics;
};

struct Explanation {
  Instance anchor;
  int fact_label = 0;
  int contrast_label = 1;
  Counterfactual best;
  /// Flipping candidates with pairwise distinct rule sets, in the order found.
  std::vector<Counterfactual> diverse;
  std::vector<ContrastPath> ranked_paths;
  double fidelity = 0.0;
  std::size_t tree_nodes = 0;
  int tree_depth = 0;
  std::size_t neighbors = 0;
  int attempts = 0;
  double elapsed_s = 0.0;
};

nlohmann::json counterfactual_to_json(const Counterfactual& cf, const Schema& schema);
/// Structured explanation document. Latency fields are left out when
/// `include_timing` is false so that the document is reproducible.
nlohmann::json explanation_to_json(const Explanation& e, const Schema& schema, bool include_timing = true);
nlohmann::json instance_to_json(const Instance& x, const Schema& schema);
/// Parses {"feature": value, ...}; categorical values are category names.
/// Throws InstanceError listing every problem (missing, unknown, wrong type).
Instance instance_from_json(const nlohmann::json& doc, const Schema& schema);

struct MutabilityOverride {
  Mutability mutability = Mutability::kMutable;
  Direction direction = Direction::kNone;
};

/// What-if adjustments, keyed by feature name.
struct Overrides {
  std::map<std::string, double> edit_cost;
  std::map<std::string, MutabilityOverride> mutability;
  std::optional<double> margin_divisor;
  std::optional<int> contrast_class;

  bool empty() const;
  static Overrides from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

/// Copy of `schema` with cost and mutability overrides applied. Throws
/// DataError for unknown features or invalid values.
Schema apply_overrides(const Schema& schema, const Overrides& overrides);

/// One anchor's cached pipeline state. Cost-only what-ifs rebuild just the
/// graph; a changed immutable set refits the tree; a changed contrast class
/// resamples the neighborhood.
class ExplainSession {
 public:
  struct StageCounts {
    int neighborhoods = 0;
    int trees = 0;
    int graphs = 0;
  };

  /// `index` must be built over the training pool and outlive the session.
  ExplainSession(const BlackBox& model, const PoolIndex& index, const VaeModel& vae, RecourseConfig config);

  Explanation explain(const Instance& x);
  /// Applies `overrides` first, then explains `x` from scratch.
  Explanation explain(const Instance& x, const Overrides& overrides);
  /// Applies `overrides` on top of the current settings and re-explains the
  /// last anchor. Throws std::logic_error without a prior explain.
  Explanation what_if(const Overrides& overrides);

  bool has_anchor() const { return anchor_.has_value(); }
  const Schema& schema() const { return schema_; }
  const RecourseConfig& config() const { return config_; }
  const SurrogateTree* tree() const { return tree_ ? &*tree_ : nullptr; }
  const NeighborSet* neighborhood() const { return neighbors_ ? &*neighbors_ : nullptr; }
  const StageCounts& stage_counts() const { return counts_; }

 private:
  Explanation run(bool resample, bool refit);
  /// Applies overrides to schema/config; returns (contrast changed, exclusion set changed).
  std::pair<bool, bool> adjust(const Overrides& overrides);

  const BlackBox& model_;
  const PoolIndex& index_;
  const VaeModel& vae_;
  RecourseConfig config_;
  Schema base_schema_;
  Schema schema_;
  std::optional<Instance> anchor_;
  int fact_ = 0;
  int contrast_ = 1;
  std::optional<NeighborSet> neighbors_;
  std::optional<SurrogateTree> tree_;
  std::vector<double> sigma_;
  StageCounts counts_;
};

/// One-shot pipeline over a fresh pool index.
Explanation explain(const Instance& x, const BlackBox& model, const Dataset& pool, const VaeModel& vae,
                    const RecourseConfig& config);

}  // namespace ctrex
