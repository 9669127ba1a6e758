#include "ctrex/latent.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "dense.hpp"

namespace ctrex {

namespace {

using detail::Mat;
using detail::Vec;

constexpr int kVaeFormatVersion = 1;
constexpr double kBatchNormEps = 1e-5;
constexpr double kBatchNormMomentum = 0.1;

Eigen::Map<const Vec> as_vec(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

Mat affine(const DenseLayer& layer, const Mat& input) {
  detail::ConstWeightMap w(layer.weight.data(), static_cast<Eigen::Index>(layer.out),
                           static_cast<Eigen::Index>(layer.in));
  Mat z = w * input;
  z.colwise() += as_vec(layer.bias);
  return z;
}

HiddenLayer make_hidden(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  HiddenLayer h;
  h.affine = detail::make_layer(in, out, Activation::kRelu, std::sqrt(2.0), rng);
  h.norm.gamma.assign(out, 1.0);
  h.norm.beta.assign(out, 0.0);
  h.norm.running_mean.assign(out, 0.0);
  h.norm.running_var.assign(out, 1.0);
  return h;
}

// Per-layer values kept from the forward pass for backpropagation.
struct HiddenCache {
  Mat input;
  Mat normalized;  // x-hat
  Vec inv_std;
  Mat pre_relu;    // gamma * x-hat + beta
  Mat keep;        // dropout multiplier (0 or 1/(1-p)), empty when unused
};

Mat hidden_forward_train(const HiddenLayer& layer, const Mat& input, double dropout,
                         std::mt19937_64* rng, HiddenCache* cache, BatchNorm* running) {
  Mat z = affine(layer.affine, input);
  const double n = static_cast<double>(z.cols());
  Vec mean = z.rowwise().mean();
  Mat centered = z.colwise() - mean;
  Vec var = centered.array().square().rowwise().sum() / n;
  Vec inv_std = (var.array() + kBatchNormEps).rsqrt();
  Mat xhat = centered.array().colwise() * inv_std.array();
  Mat y = (xhat.array().colwise() * as_vec(layer.norm.gamma).array()).colwise() +
          as_vec(layer.norm.beta).array();
  Mat h = y.cwiseMax(0.0);
  Mat keep;
  if (dropout > 0.0) {
    keep.resize(h.rows(), h.cols());
    const double scale = 1.0 / (1.0 - dropout);
    for (Eigen::Index j = 0; j < keep.cols(); ++j) {
      for (Eigen::Index i = 0; i < keep.rows(); ++i) {
        const double u = static_cast<double>((*rng)() >> 11) * 0x1.0p-53;
        keep(i, j) = u < dropout ? 0.0 : scale;
      }
    }
    h = h.cwiseProduct(keep);
  }
  if (running) {
    for (std::size_t i = 0; i < running->running_mean.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      running->running_mean[i] = (1 - kBatchNormMomentum) * running->running_mean[i] + kBatchNormMomentum * mean(k);
      running->running_var[i] = (1 - kBatchNormMomentum) * running->running_var[i] + kBatchNormMomentum * var(k);
    }
  }
  if (cache) {
    cache->input = input;
    cache->normalized = std::move(xhat);
    cache->inv_std = std::move(inv_std);
    cache->pre_relu = std::move(y);
    cache->keep = std::move(keep);
  }
  return h;
}

Mat hidden_forward_eval(const HiddenLayer& layer, const Mat& input) {
  Mat z = affine(layer.affine, input);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double inv = 1.0 / std::sqrt(layer.norm.running_var[k] + kBatchNormEps);
    z.row(i) = ((z.row(i).array() - layer.norm.running_mean[k]) * inv * layer.norm.gamma[k] +
                layer.norm.beta[k])
                   .matrix();
  }
  return z.cwiseMax(0.0);
}

// Gradient slots for one hidden layer inside the flat gradient vector.
struct HiddenGrad {
  double* weight;
  double* bias;
  double* gamma;
  double* beta;
};

Mat hidden_backward(const HiddenLayer& layer, const HiddenCache& cache, Mat grad_out,
                    const HiddenGrad& g) {
  if (cache.keep.size() > 0) grad_out = grad_out.cwiseProduct(cache.keep);
  Mat dy = grad_out.cwiseProduct((cache.pre_relu.array() > 0.0).cast<double>().matrix());
  const auto out = static_cast<Eigen::Index>(layer.affine.out);
  const auto in = static_cast<Eigen::Index>(layer.affine.in);
  const double n = static_cast<double>(dy.cols());
  Eigen::Map<Vec>(g.gamma, out) += dy.cwiseProduct(cache.normalized).rowwise().sum();
  Eigen::Map<Vec>(g.beta, out) += dy.rowwise().sum();
  Mat dxhat = dy.array().colwise() * as_vec(layer.norm.gamma).array();
  Vec sum_dxhat = dxhat.rowwise().sum();
  Vec sum_dxhat_xhat = dxhat.cwiseProduct(cache.normalized).rowwise().sum();
  Mat dz = ((dxhat * n).colwise() - sum_dxhat);
  dz -= (cache.normalized.array().colwise() * sum_dxhat_xhat.array()).matrix();
  dz = (dz.array().colwise() * (cache.inv_std.array() / n)).matrix();
  detail::WeightMap(g.weight, out, in) += dz * cache.input.transpose();
  Eigen::Map<Vec>(g.bias, out) += dz.rowwise().sum();
  detail::ConstWeightMap w(layer.affine.weight.data(), out, in);
  return w.transpose() * dz;
}

Mat dense_backward(const DenseLayer& layer, const Mat& input, const Mat& dz, double* gw, double* gb) {
  const auto out = static_cast<Eigen::Index>(layer.out);
  const auto in = static_cast<Eigen::Index>(layer.in);
  detail::WeightMap(gw, out, in) += dz * input.transpose();
  Eigen::Map<Vec>(gb, out) += dz.rowwise().sum();
  detail::ConstWeightMap w(layer.weight.data(), out, in);
  return w.transpose() * dz;
}

// Walks the trainable arrays in flatten() order.
template <typename Params, typename Fn>
void for_each_array(Params& p, Fn&& fn) {
  auto hidden = [&](auto& h) {
    fn(h.affine.weight);
    fn(h.affine.bias);
    fn(h.norm.gamma);
    fn(h.norm.beta);
  };
  for (auto& h : p.encoder_hidden) hidden(h);
  fn(p.mu_head.weight);
  fn(p.mu_head.bias);
  fn(p.logvar_head.weight);
  fn(p.logvar_head.bias);
  for (auto& h : p.decoder_hidden) hidden(h);
  fn(p.output.weight);
  fn(p.output.bias);
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ElboState {
  double loss = 0.0;
  std::vector<double> grad;
};

ElboState elbo_impl(const VaeParams& params, const Mat& x, const Mat& noise, double kl_weight,
                    double dropout, std::mt19937_64* rng, bool want_grad, VaeParams* running) {
  const double n = static_cast<double>(x.cols());
  std::vector<HiddenCache> enc_cache(params.encoder_hidden.size());
  Mat h = x;
  for (std::size_t l = 0; l < params.encoder_hidden.size(); ++l) {
    h = hidden_forward_train(params.encoder_hidden[l], h, dropout, rng,
                             want_grad ? &enc_cache[l] : nullptr,
                             running ? &running->encoder_hidden[l].norm : nullptr);
  }
  const Mat enc_out = h;
  Mat mu = affine(params.mu_head, enc_out);
  Mat logvar = affine(params.logvar_head, enc_out);
  Mat std_dev = (0.5 * logvar.array()).exp();
  Mat z = mu + std_dev.cwiseProduct(noise);

  std::vector<HiddenCache> dec_cache(params.decoder_hidden.size());
  h = z;
  for (std::size_t l = 0; l < params.decoder_hidden.size(); ++l) {
    h = hidden_forward_train(params.decoder_hidden[l], h, dropout, rng,
                             want_grad ? &dec_cache[l] : nullptr,
                             running ? &running->decoder_hidden[l].norm : nullptr);
  }
  const Mat dec_out = h;
  Mat out = affine(params.output, dec_out);

  ElboState state;
  Mat dout(out.rows(), out.cols());
  double recon = 0.0;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const double o = out(i, j), t = x(i, j);
      if (params.bernoulli_mask[static_cast<std::size_t>(i)]) {
        recon += softplus(o) - t * o;
        dout(i, j) = sigmoid(o) - t;
      } else {
        recon += 0.5 * (o - t) * (o - t);
        dout(i, j) = o - t;
      }
    }
  }
  const double kl = 0.5 * (mu.array().square() + logvar.array().exp() - logvar.array() - 1.0).sum();
  state.loss = (recon + kl_weight * kl) / n;
  if (!want_grad) return state;

  state.grad.assign(params.parameter_count(), 0.0);
  // Offsets of each array in flatten() order.
  std::vector<double*> slots;
  {
    std::size_t off = 0;
    for_each_array(params, [&](const std::vector<double>& a) {
      slots.push_back(state.grad.data() + off);
      off += a.size();
    });
  }
  std::size_t slot = 0;
  std::vector<HiddenGrad> enc_grads, dec_grads;
  for (std::size_t l = 0; l < params.encoder_hidden.size(); ++l, slot += 4) {
    enc_grads.push_back({slots[slot], slots[slot + 1], slots[slot + 2], slots[slot + 3]});
  }
  double* g_mu_w = slots[slot++];
  double* g_mu_b = slots[slot++];
  double* g_lv_w = slots[slot++];
  double* g_lv_b = slots[slot++];
  for (std::size_t l = 0; l < params.decoder_hidden.size(); ++l, slot += 4) {
    dec_grads.push_back({slots[slot], slots[slot + 1], slots[slot + 2], slots[slot + 3]});
  }
  double* g_out_w = slots[slot++];
  double* g_out_b = slots[slot++];

  dout /= n;
  Mat dh = dense_backward(params.output, dec_out, dout, g_out_w, g_out_b);
  for (std::size_t l = params.decoder_hidden.size(); l-- > 0;) {
    dh = hidden_backward(params.decoder_hidden[l], dec_cache[l], std::move(dh), dec_grads[l]);
  }
  const Mat& dz = dh;
  Mat dmu = dz + (kl_weight / n) * mu;
  Mat dlogvar = (dz.cwiseProduct(noise).cwiseProduct(std_dev) * 0.5) +
                ((kl_weight / n) * 0.5 * (logvar.array().exp() - 1.0)).matrix();
  Mat denc = dense_backward(params.mu_head, enc_out, dmu, g_mu_w, g_mu_b);
  denc += dense_backward(params.logvar_head, enc_out, dlogvar, g_lv_w, g_lv_b);
  for (std::size_t l = params.encoder_hidden.size(); l-- > 0;) {
    denc = hidden_backward(params.encoder_hidden[l], enc_cache[l], std::move(denc), enc_grads[l]);
  }
  return state;
}

nlohmann::json layer_json(const DenseLayer& l) {
  return {{"in", l.in}, {"out", l.out}, {"weight", l.weight}, {"bias", l.bias}};
}

DenseLayer layer_from_json(const nlohmann::json& j) {
  DenseLayer l;
  l.in = j.at("in").get<std::size_t>();
  l.out = j.at("out").get<std::size_t>();
  l.weight = j.at("weight").get<std::vector<double>>();
  l.bias = j.at("bias").get<std::vector<double>>();
  if (l.weight.size() != l.in * l.out || l.bias.size() != l.out) {
    throw ModelError("VAE layer arrays do not match their shape");
  }
  return l;
}

nlohmann::json hidden_json(const HiddenLayer& h) {
  auto j = layer_json(h.affine);
  j["gamma"] = h.norm.gamma;
  j["beta"] = h.norm.beta;
  j["running_mean"] = h.norm.running_mean;
  j["running_var"] = h.norm.running_var;
  return j;
}

HiddenLayer hidden_from_json(const nlohmann::json& j) {
  HiddenLayer h;
  h.affine = layer_from_json(j);
  h.affine.activation = Activation::kRelu;
  h.norm.gamma = j.at("gamma").get<std::vector<double>>();
  h.norm.beta = j.at("beta").get<std::vector<double>>();
  h.norm.running_mean = j.at("running_mean").get<std::vector<double>>();
  h.norm.running_var = j.at("running_var").get<std::vector<double>>();
  return h;
}

}  // namespace

VaeConfig vae_preset(std::size_t encoded_width, bool image) {
  VaeConfig config;
  if (image) {
    config.hidden_sizes = {500, 250};
    config.latent_dim = 32;
    config.preset = "image";
  } else if (encoded_width < 15) {
    config.hidden_sizes = {16};
    config.latent_dim = 7;
    config.preset = "narrow";
  } else if (encoded_width < 25) {
    config.hidden_sizes = {25};
    config.latent_dim = 8;
    config.preset = "medium";
  } else {
    config.hidden_sizes = {25, 16};
    config.latent_dim = 12;
    config.preset = "wide";
  }
  if (encoded_width >= 2 && config.latent_dim >= encoded_width) {
    config.latent_dim = encoded_width - 1;
  }
  return config;
}

std::size_t VaeParams::parameter_count() const {
  std::size_t n = 0;
  for_each_array(*this, [&n](const std::vector<double>& a) { n += a.size(); });
  return n;
}

std::vector<double> VaeParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for_each_array(*this, [&flat](const std::vector<double>& a) { flat.insert(flat.end(), a.begin(), a.end()); });
  return flat;
}

void VaeParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw ModelError("VAE assign: wrong parameter count");
  std::size_t k = 0;
  for_each_array(*this, [&](std::vector<double>& a) {
    for (auto& v : a) v = flat[k++];
  });
}

double gaussian_kl(std::span<const double> mu, std::span<const double> logvar) {
  if (mu.size() != logvar.size()) throw ModelError("gaussian_kl: size mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    kl += 0.5 * (mu[i] * mu[i] + std::exp(logvar[i]) - logvar[i] - 1.0);
  }
  return kl;
}

LossAndGradient elbo_loss(const VaeParams& params, const RowMatrix& inputs, const RowMatrix& noise,
                          double kl_weight, double dropout_rate, std::uint64_t dropout_seed) {
  if (inputs.cols != params.input_width()) throw ModelError("elbo_loss: dimension mismatch");
  if (noise.rows != inputs.rows || noise.cols != params.latent_dim()) {
    throw ModelError("elbo_loss: noise must be rows x latent_dim");
  }
  std::mt19937_64 rng(dropout_seed);
  auto state = elbo_impl(params, detail::to_columns(inputs), detail::to_columns(noise), kl_weight,
                         dropout_rate, &rng, true, nullptr);
  return {state.loss, std::move(state.grad)};
}

VaeModel::VaeModel(Encoder encoder, VaeParams params, VaeConfig config)
    : encoder_(std::move(encoder)), params_(std::move(params)), config_(std::move(config)) {
  if (params_.latent_dim() < 1) throw ModelError("latent_dim must be at least 1");
  if (!(config_.kl_weight > 0.0)) throw ModelError("kl_weight must be positive");
  if (params_.input_width() != encoder_.width() || params_.bernoulli_mask.size() != encoder_.width()) {
    throw ModelError("VAE width does not match the encoder");
  }
}

LatentPoint VaeModel::encode_vector(std::span<const double> encoded) const {
  if (encoded.size() != encoder_.width()) {
    throw ModelError("dimension mismatch: VAE expects " + std::to_string(encoder_.width()) + " inputs");
  }
  Mat h = Eigen::Map<const Vec>(encoded.data(), static_cast<Eigen::Index>(encoded.size()));
  for (const auto& layer : params_.encoder_hidden) h = hidden_forward_eval(layer, h);
  Mat mu = affine(params_.mu_head, h);
  return {std::vector<double>(mu.data(), mu.data() + mu.size())};
}

LatentPoint VaeModel::encode(const Instance& x) const {
  check_conforms(encoder_.schema(), x);
  return encode_vector(encoder_.encode(x));
}

RowMatrix VaeModel::encode_batch(const RowMatrix& encoded) const {
  if (encoded.cols != encoder_.width()) throw ModelError("dimension mismatch in encode_batch");
  if (encoded.rows == 0) return RowMatrix(0, latent_dim());
  Mat h = detail::to_columns(encoded);
  for (const auto& layer : params_.encoder_hidden) h = hidden_forward_eval(layer, h);
  return detail::from_columns(affine(params_.mu_head, h));
}

std::vector<double> VaeModel::reconstruct(const Instance& x) const {
  auto z = encode(x).z;
  Mat h = Eigen::Map<const Vec>(z.data(), static_cast<Eigen::Index>(z.size()));
  for (const auto& layer : params_.decoder_hidden) h = hidden_forward_eval(layer, h);
  Mat out = affine(params_.output, h);
  std::vector<double> r(out.data(), out.data() + out.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (params_.bernoulli_mask[i]) r[i] = sigmoid(r[i]);
  }
  return r;
}

nlohmann::json VaeModel::to_json() const {
  nlohmann::json enc = nlohmann::json::array(), dec = nlohmann::json::array();
  for (const auto& h : params_.encoder_hidden) enc.push_back(hidden_json(h));
  for (const auto& h : params_.decoder_hidden) dec.push_back(hidden_json(h));
  std::vector<int> mask(params_.bernoulli_mask.begin(), params_.bernoulli_mask.end());
  return {{"format_version", kVaeFormatVersion},
          {"kind", "vae"},
          {"preset", config_.preset},
          {"config",
           {{"hidden_sizes", config_.hidden_sizes},
            {"latent_dim", config_.latent_dim},
            {"epochs", config_.epochs},
            {"learning_rate", config_.learning_rate},
            {"dropout_rate", config_.dropout_rate},
            {"kl_weight", config_.kl_weight},
            {"batch_size", config_.batch_size},
            {"bernoulli_binary", config_.bernoulli_binary},
            {"seed", config_.seed}}},
          {"encoder_section", {{"hidden", enc}, {"mu", layer_json(params_.mu_head)},
                               {"logvar", layer_json(params_.logvar_head)}}},
          {"decoder_section", {{"hidden", dec}, {"output", layer_json(params_.output)},
                               {"bernoulli_mask", mask}}},
          {"encoder", encoder_.to_json()}};
}

VaeModel VaeModel::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format_version").get<int>() != kVaeFormatVersion) {
      throw ModelError("unsupported VAE format_version");
    }
    VaeConfig config;
    const auto& c = doc.at("config");
    config.hidden_sizes = c.at("hidden_sizes").get<std::vector<std::size_t>>();
    config.latent_dim = c.at("latent_dim").get<std::size_t>();
    config.epochs = c.at("epochs").get<int>();
    config.learning_rate = c.at("learning_rate").get<double>();
    config.dropout_rate = c.at("dropout_rate").get<double>();
    config.kl_weight = c.at("kl_weight").get<double>();
    config.batch_size = c.at("batch_size").get<std::size_t>();
    config.bernoulli_binary = c.at("bernoulli_binary").get<bool>();
    config.seed = c.at("seed").get<std::uint64_t>();
    config.preset = doc.at("preset").get<std::string>();
    VaeParams p;
    for (const auto& h : doc.at("encoder_section").at("hidden")) p.encoder_hidden.push_back(hidden_from_json(h));
    p.mu_head = layer_from_json(doc.at("encoder_section").at("mu"));
    p.logvar_head = layer_from_json(doc.at("encoder_section").at("logvar"));
    for (const auto& h : doc.at("decoder_section").at("hidden")) p.decoder_hidden.push_back(hidden_from_json(h));
    p.output = layer_from_json(doc.at("decoder_section").at("output"));
    for (int m : doc.at("decoder_section").at("bernoulli_mask").get<std::vector<int>>()) {
      p.bernoulli_mask.push_back(m != 0);
    }
    return VaeModel(Encoder::from_json(doc.at("encoder")), std::move(p), std::move(config));
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed VAE document: ") + e.what());
  }
}

void VaeModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write VAE file '" + path.string() + "'");
  out << to_json().dump(1) << '\n';
}

VaeModel VaeModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open VAE file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("VAE file '" + path.string() + "': " + e.what());
  }
  return from_json(doc);
}

VaeModel train_vae(const Dataset& train, const VaeConfig& config, std::vector<double>* epoch_losses) {
  const auto encoder = train.encoder();
  const auto width = encoder.width();
  if (config.latent_dim < 1) throw ModelError("latent_dim must be at least 1");
  if (config.latent_dim >= width) {
    throw ModelError("latent_dim " + std::to_string(config.latent_dim) +
                     " must be smaller than the encoded width " + std::to_string(width));
  }
  if (!(config.kl_weight > 0.0)) throw ModelError("kl_weight must be positive");
  if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0) throw ModelError("dropout_rate must be in [0, 1)");
  if (config.batch_size < 2) throw ModelError("batch_size must be at least 2 for batch norm");

  std::mt19937_64 rng(config.seed);
  VaeParams p;
  std::size_t in = width;
  for (auto h : config.hidden_sizes) {
    p.encoder_hidden.push_back(make_hidden(in, h, rng));
    in = h;
  }
  p.mu_head = detail::make_layer(in, config.latent_dim, Activation::kIdentity, 1.0, rng);
  p.logvar_head = detail::make_layer(in, config.latent_dim, Activation::kIdentity, 0.1, rng);
  in = config.latent_dim;
  for (auto it = config.hidden_sizes.rbegin(); it != config.hidden_sizes.rend(); ++it) {
    p.decoder_hidden.push_back(make_hidden(in, *it, rng));
    in = *it;
  }
  p.output = detail::make_layer(in, width, Activation::kIdentity, 1.0, rng);
  p.bernoulli_mask = config.bernoulli_binary ? encoder.binary_mask() : std::vector<bool>(width, false);

  const auto inputs = encode_rows(encoder, train.rows());
  auto flat = p.flatten();
  detail::Adam optimizer(flat.size(), config.learning_rate);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = detail::permutation(train.size(), rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      auto end = std::min(order.size(), start + config.batch_size);
      // A trailing batch of one row is folded into the previous batch.
      if (order.size() - end == 1) end = order.size();
      if (end - start < 2) break;
      std::span<const std::size_t> batch(order.data() + start, end - start);
      Mat x = detail::to_columns(inputs, batch);
      Mat noise(static_cast<Eigen::Index>(config.latent_dim), static_cast<Eigen::Index>(batch.size()));
      for (Eigen::Index j = 0; j < noise.cols(); ++j) {
        for (Eigen::Index i = 0; i < noise.rows(); ++i) noise(i, j) = detail::standard_normal(rng);
      }
      auto state = elbo_impl(p, x, noise, config.kl_weight, config.dropout_rate, &rng, true, &p);
      if (!std::isfinite(state.loss)) {
        throw ModelError("VAE training produced a non-finite loss at epoch " + std::to_string(epoch));
      }
      epoch_loss += state.loss * static_cast<double>(batch.size());
      seen += batch.size();
      optimizer.step(flat, state.grad);
      p.assign(flat);
      if (end == order.size()) break;
    }
    if (epoch_losses && seen > 0) epoch_losses->push_back(epoch_loss / static_cast<double>(seen));
  }
  return VaeModel(encoder, std::move(p), config);
}

double latent_distance(const LatentPoint& a, const LatentPoint& b) {
  if (a.z.size() != b.z.size()) throw ModelError("latent_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.z.size(); ++i) s += (a.z[i] - b.z[i]) * (a.z[i] - b.z[i]);
  return std::sqrt(s);
}

double latent_distance(const VaeModel& vae, const Instance& a, const Instance& b) {
  return latent_distance(vae.encode(a), vae.encode(b));
}

}  // namespace ctrex
