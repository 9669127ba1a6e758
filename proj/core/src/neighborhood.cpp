#include "ctrex/neighborhood.hpp"

#include <algorithm>
#include <cmath>

namespace ctrex {

PoolIndex::PoolIndex(const Dataset& pool, const BlackBox& model, const VaeModel& vae)
    : pool_(&pool) {
  if (pool.size() == 0) throw DataError("empty neighbor pool");
  labels_ = model.predict_labels(pool.rows());
  embeddings_ = vae.encode_batch(encode_rows(vae.encoder(), pool.rows()));
}

LatentPoint PoolIndex::embedding(std::size_t i) const {
  auto r = embeddings_.row(i);
  return {std::vector<double>(r.begin(), r.end())};
}

std::size_t PoolIndex::count_label(int label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

std::vector<std::pair<double, std::size_t>> PoolIndex::nearest(const LatentPoint& z, std::size_t k,
                                                               std::optional<int> label,
                                                               const Instance* exclude) const {
  if (z.z.size() != embeddings_.cols) throw ModelError("nearest: latent dimension mismatch");
  std::vector<std::pair<double, std::size_t>> candidates;
  candidates.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (label && labels_[i] != *label) continue;
    if (exclude && pool_->row(i).values == exclude->values) continue;
    auto row = embeddings_.row(i);
    double s = 0.0;
    for (std::size_t d = 0; d < row.size(); ++d) s += (z.z[d] - row[d]) * (z.z[d] - row[d]);
    candidates.emplace_back(std::sqrt(s), i);
  }
  const auto take = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end());
  candidates.resize(take);
  return candidates;
}

int resolve_contrast(std::size_t class_count, int fact_label, std::optional<int> requested) {
  if (requested) {
    if (*requested < 0 || static_cast<std::size_t>(*requested) >= class_count) {
      throw ModelError("contrast class " + std::to_string(*requested) + " out of range");
    }
    if (*requested == fact_label) throw NoContrastError("contrast class equals the fact class");
    return *requested;
  }
  if (class_count != 2) {
    throw ModelError("multi-class queries must name their contrast class");
  }
  return 1 - fact_label;
}

NeighborSet sample_neighbors(const Instance& x, const PoolIndex& index, const VaeModel& vae,
                             std::size_t k, int fact_label, int contrast_label) {
  if (k < 2 || k % 2 != 0) throw DataError("k must be even and at least 2");
  if (index.count_label(contrast_label) == 0) {
    throw NoContrastError("no pool point is labelled with the contrast class " +
                          std::to_string(contrast_label));
  }
  const auto z = vae.encode(x);
  const auto half = k / 2;
  auto facts = index.nearest(z, half, fact_label, &x);
  auto contrasts = index.nearest(z, half, contrast_label, &x);
  if (contrasts.empty()) {
    throw NoContrastError("every contrast-labelled pool point coincides with the anchor");
  }

  NeighborSet out;
  out.anchor = x;
  out.k = k;
  out.fact_label = fact_label;
  out.contrast_label = contrast_label;
  out.fact_count = facts.size();
  out.contrast_count = contrasts.size();
  out.fact_shortfall = half - facts.size();
  out.contrast_shortfall = half - contrasts.size();

  std::vector<std::pair<double, std::size_t>> merged;
  merged.reserve(facts.size() + contrasts.size());
  merged.insert(merged.end(), facts.begin(), facts.end());
  merged.insert(merged.end(), contrasts.begin(), contrasts.end());
  std::sort(merged.begin(), merged.end());
  out.members.reserve(merged.size());
  for (const auto& [d, i] : merged) {
    out.members.push_back({i, index.pool().row(i), index.labels()[i], d});
  }
  return out;
}

NeighborSet sample_neighbors(const Instance& x, const Dataset& pool, const BlackBox& model,
                             const VaeModel& vae, std::size_t k, std::optional<int> contrast_label) {
  PoolIndex index(pool, model, vae);
  const int fact = model.predict_label(x);
  const int contrast = resolve_contrast(model.class_count(), fact, contrast_label);
  return sample_neighbors(x, index, vae, k, fact, contrast);
}

}  // namespace ctrex
