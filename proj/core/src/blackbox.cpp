#include "ctrex/blackbox.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "dense.hpp"

namespace ctrex {

namespace {

constexpr int kModelFormatVersion = 1;

void require_labels(const Dataset& train) {
  if (!train.has_labels()) throw ModelError("training data has no label column");
  const auto& y = train.labels();
  const auto first = y.front();
  if (std::all_of(y.begin(), y.end(), [first](int v) { return v == first; })) {
    throw ModelError("training data contains a single class");
  }
}

std::vector<double> balanced_weights(const std::vector<int>& labels, std::size_t classes) {
  std::vector<double> counts(classes, 0.0);
  for (int y : labels) counts[static_cast<std::size_t>(y)] += 1.0;
  std::vector<double> w(classes, 1.0);
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] > 0) w[c] = static_cast<double>(labels.size()) / (static_cast<double>(classes) * counts[c]);
  }
  return w;
}

double weighted_loss(const detail::Mat& probs, std::span<const int> labels,
                     std::span<const double> weights, detail::Mat* grad_logits) {
  const auto n = probs.cols();
  double loss = 0.0;
  if (grad_logits) *grad_logits = probs;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto y = labels[static_cast<std::size_t>(i)];
    const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(y)];
    loss -= w * std::log(std::max(probs(y, i), 1e-300));
    if (grad_logits) {
      grad_logits->col(i) *= w;
      (*grad_logits)(y, i) -= w;
    }
  }
  if (grad_logits) *grad_logits /= static_cast<double>(n);
  return loss / static_cast<double>(n);
}

}  // namespace

int argmax_label(std::span<const double> probabilities) {
  if (probabilities.empty()) throw ModelError("empty probability vector");
  std::size_t best = 0;
  for (std::size_t c = 1; c < probabilities.size(); ++c) {
    if (probabilities[c] > probabilities[best]) best = c;
  }
  return static_cast<int>(best);
}

RowMatrix BlackBox::predict_proba_batch(const RowMatrix& encoded) const {
  RowMatrix out(encoded.rows, class_count());
  for (std::size_t i = 0; i < encoded.rows; ++i) {
    auto p = predict_proba(encoded.row(i));
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

Prediction BlackBox::predict(const Instance& x) const {
  check_conforms(encoder_.schema(), x);
  Prediction out;
  out.probabilities = predict_proba(encoder_.encode(x));
  out.label = argmax_label(out.probabilities);
  return out;
}

std::vector<int> BlackBox::predict_labels(std::span<const Instance> xs) const {
  if (xs.empty()) return {};
  auto probs = predict_proba_batch(encode_rows(encoder_, xs));
  std::vector<int> labels(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) labels[i] = argmax_label(probs.row(i));
  return labels;
}

std::string to_string(Activation activation) {
  switch (activation) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kRelu:
      return "relu";
    case Activation::kSoftmax:
      return "softmax";
  }
  return "unknown";
}

Activation parse_activation(const std::string& text) {
  if (text == "identity") return Activation::kIdentity;
  if (text == "relu") return Activation::kRelu;
  if (text == "softmax") return Activation::kSoftmax;
  throw ModelError("unknown activation '" + text + "'");
}

void MlpParams::validate() const {
  if (layers.empty()) throw ModelError("network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.in == 0 || layer.out == 0) throw ModelError("layer with zero width");
    if (layer.weight.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
      throw ModelError("layer " + std::to_string(l) + ": parameter arrays do not match shape");
    }
    if (l > 0 && layers[l - 1].out != layer.in) {
      throw ModelError("layer " + std::to_string(l) + ": input width " + std::to_string(layer.in) +
                       " does not match previous output " + std::to_string(layers[l - 1].out));
    }
  }
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<double> MlpParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers) {
    flat.insert(flat.end(), l.weight.begin(), l.weight.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void MlpParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw ModelError("assign: wrong parameter count");
  std::size_t k = 0;
  for (auto& l : layers) {
    for (auto& w : l.weight) w = flat[k++];
    for (auto& b : l.bias) b = flat[k++];
  }
}

MlpModel::MlpModel(Encoder encoder, MlpParams params, std::string kind,
                   std::optional<SplitProvenance> provenance)
    : BlackBox(std::move(encoder)),
      params_(std::move(params)),
      kind_(std::move(kind)),
      provenance_(provenance) {
  params_.validate();
  if (params_.input_width() != input_width()) {
    throw ModelError("network input width " + std::to_string(params_.input_width()) +
                     " does not match encoded width " + std::to_string(input_width()));
  }
  if (params_.layers.back().activation != Activation::kSoftmax) {
    throw ModelError("classifier output layer must be softmax");
  }
  if (params_.output_width() < 2) throw ModelError("classifier needs at least 2 classes");
}

std::vector<double> MlpModel::predict_proba(std::span<const double> encoded) const {
  if (encoded.size() != input_width()) {
    throw ModelError("dimension mismatch: expected " + std::to_string(input_width()) +
                     " inputs, got " + std::to_string(encoded.size()));
  }
  detail::Mat x = Eigen::Map<const detail::Vec>(encoded.data(), static_cast<Eigen::Index>(encoded.size()));
  auto acts = detail::forward_all(params_, x);
  const auto& p = acts.back();
  return {p.data(), p.data() + p.size()};
}

RowMatrix MlpModel::predict_proba_batch(const RowMatrix& encoded) const {
  if (encoded.cols != input_width()) throw ModelError("dimension mismatch in batch prediction");
  if (encoded.rows == 0) return RowMatrix(0, class_count());
  auto acts = detail::forward_all(params_, detail::to_columns(encoded));
  return detail::from_columns(acts.back());
}

std::string MlpModel::metadata() const {
  std::ostringstream out;
  out << kind_ << " [";
  for (std::size_t l = 0; l < params_.layers.size(); ++l) {
    if (l) out << ", ";
    out << params_.layers[l].in << "->" << params_.layers[l].out << " "
        << to_string(params_.layers[l].activation);
  }
  out << "]";
  return out.str();
}

nlohmann::json MlpModel::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : params_.layers) {
    layers.push_back({{"in", l.in},
                      {"out", l.out},
                      {"activation", to_string(l.activation)},
                      {"weight", l.weight},
                      {"bias", l.bias}});
  }
  nlohmann::json doc = {{"format_version", kModelFormatVersion},
                        {"kind", kind_},
                        {"layers", std::move(layers)},
                        {"encoder", encoder().to_json()}};
  if (provenance_) {
    doc["split"] = {{"seed", provenance_->seed}, {"train_fraction", provenance_->train_fraction}};
  }
  return doc;
}

MlpModel MlpModel::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format_version").get<int>() != kModelFormatVersion) {
      throw ModelError("unsupported model format_version");
    }
    MlpParams params;
    for (const auto& l : doc.at("layers")) {
      DenseLayer layer;
      layer.in = l.at("in").get<std::size_t>();
      layer.out = l.at("out").get<std::size_t>();
      layer.activation = parse_activation(l.at("activation").get<std::string>());
      layer.weight = l.at("weight").get<std::vector<double>>();
      layer.bias = l.at("bias").get<std::vector<double>>();
      params.layers.push_back(std::move(layer));
    }
    std::optional<SplitProvenance> prov;
    if (doc.contains("split")) {
      prov = SplitProvenance{doc["split"].at("seed").get<std::uint64_t>(),
                             doc["split"].at("train_fraction").get<double>()};
    }
    return MlpModel(Encoder::from_json(doc.at("encoder")), std::move(params),
                    doc.at("kind").get<std::string>(), prov);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model document: ") + e.what());
  }
}

void MlpModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write model file '" + path.string() + "'");
  out << to_json().dump(1) << '\n';
}

MlpModel MlpModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("model file '" + path.string() + "': " + e.what());
  }
  return from_json(doc);
}

RowMatrix encode_rows(const Encoder& encoder, std::span<const Instance> rows) {
  RowMatrix out(rows.size(), encoder.width());
  for (std::size_t i = 0; i < rows.size(); ++i) encoder.encode_into(rows[i], out.row(i));
  return out;
}

LossAndGradient classifier_loss(const MlpParams& params, const RowMatrix& inputs,
                                std::span<const int> labels, std::span<const double> class_weights) {
  params.validate();
  if (inputs.rows != labels.size() || inputs.rows == 0) throw ModelError("batch/label size mismatch");
  if (inputs.cols != params.input_width()) throw ModelError("dimension mismatch");
  auto acts = detail::forward_all(params, detail::to_columns(inputs));
  detail::Mat grad_logits;
  LossAndGradient out;
  out.loss = weighted_loss(acts.back(), labels, class_weights, &grad_logits);
  out.gradient.assign(params.parameter_count(), 0.0);
  detail::backward(params, acts, std::move(grad_logits), out.gradient);
  return out;
}

MlpModel train_logistic(const Dataset& train, const LogisticConfig& config,
                        std::vector<double>* epoch_losses) {
  require_labels(train);
  if (config.epochs < 0 || !(config.learning_rate > 0)) throw ModelError("invalid logistic config");
  const auto encoder = train.encoder();
  const auto classes = train.class_count();
  std::mt19937_64 rng(config.seed);
  MlpParams params;
  params.layers.push_back(detail::make_layer(encoder.width(), classes, Activation::kSoftmax, 0.01, rng));

  const auto inputs = encode_rows(encoder, train.rows());
  const auto& labels = train.labels();
  auto flat = params.flatten();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto lg = classifier_loss(params, inputs, labels);
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] -= config.learning_rate * lg.gradient[i];
    params.assign(flat);
    if (epoch_losses) epoch_losses->push_back(classifier_loss(params, inputs, labels).loss);
  }
  return MlpModel(encoder, std::move(params), "logistic");
}

MlpModel train_mlp(const Dataset& train, const MlpConfig& config, std::vector<double>* epoch_losses) {
  require_labels(train);
  if (config.epochs < 0 || !(config.learning_rate > 0) || config.batch_size == 0) {
    throw ModelError("invalid mlp config");
  }
  const auto encoder = train.encoder();
  const auto classes = train.class_count();
  const auto& labels = train.labels();
  std::vector<double> weights =
      config.class_weights.empty() ? balanced_weights(labels, classes) : config.class_weights;
  if (weights.size() != classes) throw ModelError("class_weights length does not match class count");

  std::mt19937_64 rng(config.seed);
  MlpParams params;
  std::size_t width = encoder.width();
  for (auto h : config.hidden_sizes) {
    if (h == 0) throw ModelError("hidden layer of width 0");
    params.layers.push_back(detail::make_layer(width, h, Activation::kRelu, std::sqrt(2.0), rng));
    width = h;
  }
  params.layers.push_back(detail::make_layer(width, classes, Activation::kSoftmax, 1.0, rng));

  const auto inputs = encode_rows(encoder, train.rows());
  auto flat = params.flatten();
  detail::RmsProp optimizer(flat.size(), config.learning_rate, config.rmsprop_decay,
                            config.rmsprop_epsilon);
  std::vector<double> grad(flat.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = detail::permutation(train.size(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto end = std::min(order.size(), start + config.batch_size);
      std::span<const std::size_t> batch(order.data() + start, end - start);
      auto acts = detail::forward_all(params, detail::to_columns(inputs, batch));
      std::vector<int> batch_labels(batch.size());
      for (std::size_t k = 0; k < batch.size(); ++k) batch_labels[k] = labels[batch[k]];
      detail::Mat grad_logits;
      weighted_loss(acts.back(), batch_labels, weights, &grad_logits);
      std::fill(grad.begin(), grad.end(), 0.0);
      detail::backward(params, acts, std::move(grad_logits), grad);
      optimizer.step(flat, grad);
      params.assign(flat);
    }
    if (epoch_losses) epoch_losses->push_back(classifier_loss(params, inputs, labels, weights).loss);
  }
  return MlpModel(encoder, std::move(params), "mlp");
}

}  // namespace ctrex
