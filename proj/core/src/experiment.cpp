#include "ctrex/experiment.hpp"

#include <stdexcept>

#include "ctrex/random.hpp"
#include "ctrex/synthetic.hpp"

namespace ctrex {

ModelKind parse_model_kind(const std::string& text) {
  if (text == "logistic" || text == "lr") return ModelKind::kLogistic;
  if (text == "mlp") return ModelKind::kMlp;
  throw std::invalid_argument("unknown model kind '" + text + "' (expected logistic or mlp)");
}

std::string to_string(ModelKind kind) { return kind == ModelKind::kLogistic ? "logistic" : "mlp"; }

MlpModel train_model(const Dataset& train, ModelKind kind, std::uint64_t seed) {
  if (kind == ModelKind::kLogistic) {
    LogisticConfig c;
    c.seed = seed;
    return train_logistic(train, c);
  }
  MlpConfig c;
  c.seed = seed;
  return train_mlp(train, c);
}

VaeModel train_default_vae(const Dataset& train, std::uint64_t seed, bool image, int epochs) {
  auto config = vae_preset(train.encoder().width(), image);
  config.seed = seed;
  if (epochs > 0) config.epochs = epochs;
  return train_vae(train, config);
}

Experiment prepare_experiment(const Dataset& full, const ExperimentOptions& options) {
  auto [train, test] = split(full, options.train_fraction, options.seed);
  auto model = train_model(train, options.model, derive_seed(options.seed, 1));
  model.set_provenance({options.seed, options.train_fraction});
  auto vae = train_default_vae(train, derive_seed(options.seed, 2), options.image, options.vae_epochs);
  return {std::move(train), std::move(test), std::make_shared<const MlpModel>(std::move(model)),
          std::make_shared<const VaeModel>(std::move(vae))};
}

Dataset make_synthetic(const std::string& name, std::size_t rows, std::uint64_t seed) {
  if (name == "blobs") return make_blobs(rows, seed);
  if (name == "moons") return make_moons(rows, seed);
  if (name == "xor") return make_xor(rows, seed);
  throw std::invalid_argument("unknown synthetic dataset '" + name + "' (expected blobs, moons or xor)");
}

}  // namespace ctrex
