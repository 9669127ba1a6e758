#pragma once

// Classifier interface f and the reference models (softmax regression and a
// small ReLU MLP) used to exercise the explanation pipeline.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrex/dataset.hpp"
#include "ctrex/matrix.hpp"

namespace ctrex {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;
};

/// Index of the largest probability; ties go to the lowest class index.
int argmax_label(std::span<const double> probabilities);

/// A classifier over encoded (normalized, one-hot) vectors. The encoder that
/// produced its training inputs travels with it so raw instances can be
/// scored directly.
class BlackBox {
 public:
  explicit BlackBox(Encoder encoder) : encoder_(std::move(encoder)) {}
  virtual ~BlackBox() = default;

  virtual std::vector<double> predict_proba(std::span<const double> encoded) const = 0;
  /// Row-wise probabilities; the default loops over predict_proba.
  virtual RowMatrix predict_proba_batch(const RowMatrix& encoded) const;
  virtual std::size_t class_count() const = 0;
  virtual std::string metadata() const = 0;

  const Encoder& encoder() const { return encoder_; }
  std::size_t input_width() const { return encoder_.width(); }

  Prediction predict(const Instance& x) const;
  int predict_label(const Instance& x) const { return predict(x).label; }
  /// Labels for many raw instances at once.
  std::vector<int> predict_labels(std::span<const Instance> xs) const;

 private:
  Encoder encoder_;
};

/// Free-function form of BlackBox::predict.
inline Prediction predict(const BlackBox& model, const Instance& x) { return model.predict(x); }

enum class Activation { kIdentity, kRelu, kSoftmax };

std::string to_string(Activation activation);
Activation parse_activation(const std::string& text);

/// Affine layer; `weight` is out x in, row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;
  std::vector<double> bias;
  Activation activation = Activation::kIdentity;
};

struct MlpParams {
  std::vector<DenseLayer> layers;

  /// Consecutive dimensions must agree and arrays must match their shapes.
  void validate() const;
  std::size_t input_width() const { return layers.empty() ? 0 : layers.front().in; }
  std::size_t output_width() const { return layers.empty() ? 0 : layers.back().out; }
  std::size_t parameter_count() const;
  /// Layer by layer: weights then biases.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
};

/// Where the training rows came from, so callers can rebuild the same split.
struct SplitProvenance {
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
};

class MlpModel final : public BlackBox {
 public:
  MlpModel(Encoder encoder, MlpParams params, std::string kind,
           std::optional<SplitProvenance> provenance = std::nullopt);

  std::vector<double> predict_proba(std::span<const double> encoded) const override;
  RowMatrix predict_proba_batch(const RowMatrix& encoded) const override;
  std::size_t class_count() const override { return params_.output_width(); }
  std::string metadata() const override;

  const MlpParams& params() const { return params_; }
  const std::string& kind() const { return kind_; }
  const std::optional<SplitProvenance>& provenance() const { return provenance_; }
  void set_provenance(SplitProvenance p) { provenance_ = p; }

  nlohmann::json to_json() const;
  static MlpModel from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static MlpModel load(const std::filesystem::path& path);

 private:
  MlpParams params_;
  std::string kind_;
  std::optional<SplitProvenance> provenance_;
};

struct LogisticConfig {
  double learning_rate = 0.5;
  int epochs = 300;
  std::uint64_t seed = 0;
};

struct MlpConfig {
  std::vector<std::size_t> hidden_sizes{13, 4};
  double learning_rate = 0.005;
  int epochs = 60;
  std::size_t batch_size = 32;
  /// Per-class loss weights; empty means balanced (n / (C * n_c)).
  std::vector<double> class_weights;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  std::uint64_t seed = 0;
};

/// Full-batch gradient descent on softmax cross-entropy.
/// `epoch_losses`, when given, receives the training loss after each epoch.
MlpModel train_logistic(const Dataset& train, const LogisticConfig& config,
                        std::vector<double>* epoch_losses = nullptr);

/// RMSProp on class-weighted cross-entropy; ReLU hidden layers.
MlpModel train_mlp(const Dataset& train, const MlpConfig& config,
                   std::vector<double>* epoch_losses = nullptr);

/// Class-weighted mean cross-entropy of a softmax network on a batch, and its
/// gradient in MlpParams::flatten() order. Empty weights mean all ones.
struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};
LossAndGradient classifier_loss(const MlpParams& params, const RowMatrix& inputs,
                                std::span<const int> labels,
                                std::span<const double> class_weights = {});

/// Encodes every row with `encoder`.
RowMatrix encode_rows(const Encoder& encoder, std::span<const Instance> rows);

}  // namespace ctrex
