#pragma once

// Per-counterfactual evaluation: sparsity, proximity, redundancy,
// attainability (yNN) and constraint violations.

#include <cstddef>
#include <utility>

#include <nlohmann/json.hpp>

#include "ctrex/blackbox.hpp"
#include "ctrex/dataset.hpp"
#include "ctrex/latent.hpp"
#include "ctrex/neighborhood.hpp"

namespace ctrex {

struct MetricsRecord {
  std::size_t l0 = 0;
  double l2 = 0.0;
  double vae_dist = 0.0;
  std::size_t redundancy = 0;
  double ynn = 0.0;
  bool flipped = false;
  double latency_s = 0.0;
  std::size_t immutability_violations = 0;
  std::size_t semi_immutability_violations = 0;

  nlohmann::json to_json() const;
};

/// Numeric values closer than this count as unchanged.
inline constexpr double kChangeTolerance = 1e-9;

bool feature_changed(const FeatureSchema& feature, double a, double b);

/// Number of features whose values differ.
std::size_t l0_cost(const Schema& schema, const Instance& x, const Instance& x_prime);

/// Euclidean distance on normalized numerics; each differing categorical
/// feature contributes 1.
double l2_cost(const Encoder& encoder, const Instance& x, const Instance& x_prime);

double vae_distance_metric(const VaeModel& vae, const Instance& x, const Instance& x_prime);

/// Changed features whose individual reversion to x keeps x_prime's label.
/// Throws std::invalid_argument when x_prime does not change the label of x.
std::size_t redundancy(const Instance& x, const Instance& x_prime, const BlackBox& model);

/// Fraction of the k nearest pool rows (latent distance) sharing x_prime's
/// black-box label.
double ynn(const Instance& x_prime, const PoolIndex& pool, const BlackBox& model, const VaeModel& vae,
           std::size_t k = 5);

/// (immutable features changed, semi-immutable features moved against their direction).
std::pair<std::size_t, std::size_t> violations(const Instance& x, const Instance& x_prime,
                                               const Schema& schema);

/// Full record. Redundancy is only computed for flipping counterfactuals.
MetricsRecord evaluate_counterfactual(const Instance& x, const Instance& x_prime, const BlackBox& model,
                                      const PoolIndex& pool, const VaeModel& vae, const Schema& schema,
                                      double latency_s);

}  // namespace ctrex
