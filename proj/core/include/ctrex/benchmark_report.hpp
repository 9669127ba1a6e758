#pragma once

// Batch evaluation over many anchors with per-anchor records and aggregates.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrex/blackbox.hpp"
#include "ctrex/dataset.hpp"
#include "ctrex/latent.hpp"
#include "ctrex/metrics.hpp"
#include "ctrex/recourse.hpp"

namespace ctrex {

struct AnchorResult {
  std::size_t anchor = 0;  // position in the anchor list
  std::optional<std::string> id;
  int fact_label = 0;
  int contrast_label = 0;
  /// "ok", "no_path", "no_contrast", "infeasible", "surrogate" or "error".
  std::string status = "ok";
  std::string message;
  bool flipped = false;
  int attempts = 0;
  double fidelity = 0.0;   // also set for no_path rows
  std::size_t tree_nodes = 0;  // 0 when no surrogate was fitted
  std::size_t rule_count = 0;
  double path_cost = 0.0;
  std::size_t diverse = 0;
  MetricsRecord metrics;  // meaningful when status == "ok"
  double latency_s = 0.0;
};

struct Summary {
  double mean = 0.0;
  double median = 0.0;
};

struct BenchmarkReport {
  std::vector<AnchorResult> rows;
  std::size_t anchors = 0;
  std::size_t explained = 0;  // rows with status ok
  double flip_rate = 0.0;     // flipped / anchors, failures count as not flipped
  std::size_t immutability_violations = 0;
  std::size_t semi_immutability_violations = 0;
  /// Fidelity covers every row with a surrogate; the rest cover ok rows.
  Summary l0, l2, vae_dist, redundancy, ynn, fidelity, latency_s;

  /// One row per anchor. Latency is omitted when `include_timing` is false.
  std::string to_csv(bool include_timing = false) const;
  nlohmann::json summary_json(bool include_timing = false) const;
};

Summary summarize(std::span<const double> values);

/// Explains every anchor with a per-anchor seed derived from config.seed.
/// Pipeline failures are recorded per row rather than thrown.
BenchmarkReport run_benchmark(std::span<const Instance> anchors, const BlackBox& model, const Dataset& pool,
                              const VaeModel& vae, const RecourseConfig& config);

/// `n` rows of `data` split equally among the black-box labels in `classes`,
/// drawn in a seeded shuffled order. Throws when a class has too few rows.
std::vector<std::size_t> balanced_anchor_indices(const Dataset& data, const BlackBox& model, std::size_t n,
                                                 std::span<const int> classes, std::uint64_t seed);

}  // namespace ctrex
