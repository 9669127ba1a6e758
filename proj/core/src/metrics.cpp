#include "ctrex/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace ctrex {

nlohmann::json MetricsRecord::to_json() const {
  return {{"l0", l0},
          {"l2", l2},
          {"vae_dist", vae_dist},
          {"redundancy", redundancy},
          {"ynn", ynn},
          {"flipped", flipped},
          {"latency_s", latency_s},
          {"immutability_violations", immutability_violations},
          {"semi_immutability_violations", semi_immutability_violations}};
}

bool feature_changed(const FeatureSchema& feature, double a, double b) {
  return feature.numeric() ? std::abs(a - b) > kChangeTolerance : a != b;
}

std::size_t l0_cost(const Schema& schema, const Instance& x, const Instance& x_prime) {
  if (x.size() != schema.size() || x_prime.size() != schema.size()) {
    throw std::invalid_argument("l0_cost: instances do not match the schema width");
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) n += feature_changed(schema[i], x[i], x_prime[i]);
  return n;
}

double l2_cost(const Encoder& encoder, const Instance& x, const Instance& x_prime) {
  const auto& schema = encoder.schema();
  if (x.size() != schema.size() || x_prime.size() != schema.size()) {
    throw std::invalid_argument("l2_cost: instances do not match the schema width");
  }
  const auto& stddev = encoder.normalization().stddev;
  double sum = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].numeric()) {
      const double d = (x[i] - x_prime[i]) / stddev[i];
      sum += d * d;
    } else if (x[i] != x_prime[i]) {
      sum += 1.0;
    }
  }
  return std::sqrt(sum);
}

double vae_distance_metric(const VaeModel& vae, const Instance& x, const Instance& x_prime) {
  return latent_distance(vae, x, x_prime);
}

std::size_t redundancy(const Instance& x, const Instance& x_prime, const BlackBox& model) {
  const int fact = model.predict_label(x);
  const int label = model.predict_label(x_prime);
  if (label == fact) throw std::invalid_argument("redundancy: x_prime does not flip the prediction");
  const auto& schema = model.encoder().schema();
  std::size_t count = 0;
  Instance probe = x_prime;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!feature_changed(schema[i], x[i], x_prime[i])) continue;
    probe[i] = x[i];
    count += model.predict_label(probe) == label;
    probe[i] = x_prime[i];
  }
  return count;
}

double ynn(const Instance& x_prime, const PoolIndex& pool, const BlackBox& model, const VaeModel& vae,
           std::size_t k) {
  if (pool.size() == 0) throw std::invalid_argument("ynn: empty pool");
  if (k == 0) throw std::invalid_argument("ynn: k must be positive");
  const int label = model.predict_label(x_prime);
  const auto near = pool.nearest(vae.encode(x_prime), k);
  std::size_t agree = 0;
  for (const auto& [d, idx] : near) agree += pool.labels()[idx] == label;
  return static_cast<double>(agree) / static_cast<double>(near.size());
}

std::pair<std::size_t, std::size_t> violations(const Instance& x, const Instance& x_prime,
                                               const Schema& schema) {
  std::size_t immutable = 0, direction = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& f = schema[i];
    if (!feature_changed(f, x[i], x_prime[i])) continue;
    if (f.mutability == Mutability::kImmutable) {
      ++immutable;
    } else if (f.mutability == Mutability::kSemiImmutable && !f.change_allowed(x[i], x_prime[i])) {
      ++direction;
    }
  }
  return {immutable, direction};
}

MetricsRecord evaluate_counterfactual(const Instance& x, const Instance& x_prime, const BlackBox& model,
                                      const PoolIndex& pool, const VaeModel& vae, const Schema& schema,
                                      double latency_s) {
  MetricsRecord r;
  r.l0 = l0_cost(schema, x, x_prime);
  r.l2 = l2_cost(model.encoder(), x, x_prime);
  r.vae_dist = vae_distance_metric(vae, x, x_prime);
  r.flipped = model.predict_label(x_prime) != model.predict_label(x);
  r.redundancy = r.flipped ? redundancy(x, x_prime, model) : 0;
  r.ynn = ynn(x_prime, pool, model, vae);
  r.latency_s = latency_s;
  std::tie(r.immutability_violations, r.semi_immutability_violations) = violations(x, x_prime, schema);
  return r;
}

}  // namespace ctrex
