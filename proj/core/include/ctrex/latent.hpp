#pragma once

// Gaussian VAE used as a learned embedding: neighbors are sampled and
// proximity is measured by Euclidean distance between posterior means.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrex/blackbox.hpp"
#include "ctrex/dataset.hpp"
#include "ctrex/matrix.hpp"

namespace ctrex {

struct VaeConfig {
  std::vector<std::size_t> hidden_sizes{25};
  std::size_t latent_dim = 8;
  int epochs = 10;
  double learning_rate = 1e-3;
  double dropout_rate = 0.2;
  double kl_weight = 2.5e-4;
  std::size_t batch_size = 64;
  /// Bernoulli likelihood on one-hot coordinates instead of Gaussian.
  bool bernoulli_binary = false;
  std::uint64_t seed = 0;
  std::string preset = "custom";
};

/// Architecture chosen from the encoded width:
///   width < 15 -> hidden (16), latent 7
///   15..24     -> hidden (25), latent 8
///   >= 25      -> hidden (25, 16), latent 12
///   images     -> hidden (500, 250), latent 32
/// The latent size is capped at width - 1 for very narrow inputs.
VaeConfig vae_preset(std::size_t encoded_width, bool image = false);

struct BatchNorm {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
};

/// Affine -> batch norm -> ReLU -> dropout.
struct HiddenLayer {
  DenseLayer affine;
  BatchNorm norm;
};

struct VaeParams {
  std::vector<HiddenLayer> encoder_hidden;
  DenseLayer mu_head;
  DenseLayer logvar_head;
  std::vector<HiddenLayer> decoder_hidden;
  DenseLayer output;
  /// Output coordinates modelled as Bernoulli; the rest are unit-variance Gaussian.
  std::vector<bool> bernoulli_mask;

  std::size_t input_width() const { return output.out; }
  std::size_t latent_dim() const { return mu_head.out; }
  /// Trainable parameters only (weights, biases, gamma, beta) in a fixed order:
  /// encoder hidden, mu head, logvar head, decoder hidden, output.
  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
};

struct LatentPoint {
  std::vector<double> z;
};

/// KL(N(mu, exp(logvar)) || N(0, I)) summed over dimensions.
double gaussian_kl(std::span<const double> mu, std::span<const double> logvar);

/// Negative ELBO averaged over the batch, with batch norm in training mode,
/// and its gradient in VaeParams::flatten() order. `noise` holds one standard
/// normal draw per (row, latent dim). Dropout uses `dropout_seed` when
/// `dropout_rate` > 0.
LossAndGradient elbo_loss(const VaeParams& params, const RowMatrix& inputs, const RowMatrix& noise,
                          double kl_weight, double dropout_rate = 0.0,
                          std::uint64_t dropout_seed = 0);

class VaeModel {
 public:
  VaeModel(Encoder encoder, VaeParams params, VaeConfig config);

  const Encoder& encoder() const { return encoder_; }
  const VaeParams& params() const { return params_; }
  const VaeConfig& config() const { return config_; }
  std::size_t latent_dim() const { return params_.latent_dim(); }

  /// Posterior mean of x (evaluation-mode batch norm, no dropout).
  LatentPoint encode(const Instance& x) const;
  LatentPoint encode_vector(std::span<const double> encoded) const;
  /// One row of latent means per input row.
  RowMatrix encode_batch(const RowMatrix& encoded) const;
  /// Decoder mean for the posterior mean of x, in encoded space.
  std::vector<double> reconstruct(const Instance& x) const;

  nlohmann::json to_json() const;
  static VaeModel from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static VaeModel load(const std::filesystem::path& path);

 private:
  Encoder encoder_;
  VaeParams params_;
  VaeConfig config_;
};

/// Trains with Adam on mini-batches using the reparameterization trick.
/// `epoch_losses`, when given, receives the mean training loss per epoch.
VaeModel train_vae(const Dataset& train, const VaeConfig& config,
                   std::vector<double>* epoch_losses = nullptr);

/// ||z - z'||_2 between two latent points.
double latent_distance(const LatentPoint& a, const LatentPoint& b);
double latent_distance(const VaeModel& vae, const Instance& a, const Instance& b);

}  // namespace ctrex
