#pragma once

// Split a dataset, train a black box and a VAE on the training part. Shared
// by the command-line tool, benchmarks and acceptance checks.

#include <cstdint>
#include <memory>
#include <string>

#include "ctrex/blackbox.hpp"
#include "ctrex/dataset.hpp"
#include "ctrex/latent.hpp"

namespace ctrex {

enum class ModelKind { kLogistic, kMlp };

ModelKind parse_model_kind(const std::string& text);
std::string to_string(ModelKind kind);

struct Experiment {
  Dataset train;
  Dataset test;
  std::shared_ptr<const MlpModel> model;
  std::shared_ptr<const VaeModel> vae;
};

struct ExperimentOptions {
  ModelKind model = ModelKind::kMlp;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  bool image = false;
  /// Overrides the preset epoch count when positive.
  int vae_epochs = 0;
};

MlpModel train_model(const Dataset& train, ModelKind kind, std::uint64_t seed);
VaeModel train_default_vae(const Dataset& train, std::uint64_t seed, bool image = false, int epochs = 0);

Experiment prepare_experiment(const Dataset& full, const ExperimentOptions& options);

/// "blobs", "moons" or "xor".
Dataset make_synthetic(const std::string& name, std::size_t rows, std::uint64_t seed);

}  // namespace ctrex
