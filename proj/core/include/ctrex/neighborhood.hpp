#pragma once

// Class-balanced local neighborhoods in latent space, labelled by the black box.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ctrex/blackbox.hpp"
#include "ctrex/dataset.hpp"
#include "ctrex/latent.hpp"
#include "ctrex/matrix.hpp"

namespace ctrex {

/// The pool holds no point the black box assigns to the contrast class, so
/// no explanation can be produced.
class NoContrastError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Neighbor {
  std::size_t pool_index = 0;
  Instance instance;
  int label = 0;          // black-box label
  double distance = 0.0;  // latent distance to the anchor
};

struct NeighborSet {
  Instance anchor;
  std::vector<Neighbor> members;  // ascending by (distance, pool_index)
  std::size_t k = 0;
  int fact_label = 0;
  int contrast_label = 1;
  std::size_t fact_count = 0;
  std::size_t contrast_count = 0;
  std::size_t fact_shortfall = 0;
  std::size_t contrast_shortfall = 0;

  std::size_t size() const { return members.size(); }
  bool has_shortfall() const { return fact_shortfall + contrast_shortfall > 0; }
};

/// Black-box labels and latent embeddings of every pool row, computed once.
/// Keeps a reference to `pool`, which must outlive the index.
class PoolIndex {
 public:
  PoolIndex(const Dataset& pool, const BlackBox& model, const VaeModel& vae);

  const Dataset& pool() const { return *pool_; }
  std::size_t size() const { return labels_.size(); }
  const std::vector<int>& labels() const { return labels_; }
  LatentPoint embedding(std::size_t i) const;
  std::size_t count_label(int label) const;

  /// Exact nearest pool rows to `z` by latent distance, ties by row index.
  /// `label` restricts candidates to one black-box label; rows equal to
  /// `exclude` are skipped.
  std::vector<std::pair<double, std::size_t>> nearest(const LatentPoint& z, std::size_t k,
                                                      std::optional<int> label = std::nullopt,
                                                      const Instance* exclude = nullptr) const;

 private:
  const Dataset* pool_;
  std::vector<int> labels_;
  RowMatrix embeddings_;
};

/// Contrast class for a query: the explicit choice, or the other class of a
/// binary problem. Multi-class problems must name the contrast class.
int resolve_contrast(std::size_t class_count, int fact_label, std::optional<int> requested);

/// k/2 nearest fact-labelled and k/2 nearest contrast-labelled pool rows.
/// A class with fewer candidates contributes all of them and the shortfall
/// is recorded.
NeighborSet sample_neighbors(const Instance& x, const PoolIndex& index, const VaeModel& vae,
                             std::size_t k, int fact_label, int contrast_label);

NeighborSet sample_neighbors(const Instance& x, const Dataset& pool, const BlackBox& model,
                             const VaeModel& vae, std::size_t k,
                             std::optional<int> contrast_label = std::nullopt);

}  // namespace ctrex
