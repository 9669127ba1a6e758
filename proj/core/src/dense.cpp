#include "dense.hpp"

#include <cmath>
#include <numeric>

namespace ctrex::detail {

Mat to_columns(const RowMatrix& m) {
  Mat out(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
  }
  return out;
}

Mat to_columns(const RowMatrix& m, std::span<const std::size_t> rows) {
  Mat out(m.cols, rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t j = 0; j < m.cols; ++j) out(j, k) = m(rows[k], j);
  }
  return out;
}

RowMatrix from_columns(const Mat& m) {
  RowMatrix out(m.cols(), m.rows());
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    for (Eigen::Index j = 0; j < m.rows(); ++j) out(i, j) = m(j, i);
  }
  return out;
}

void softmax_columns(Mat& logits) {
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    auto col = logits.col(c);
    const double mx = col.maxCoeff();
    col = (col.array() - mx).exp();
    col /= col.sum();
  }
}

void relu_inplace(Mat& m) { m = m.cwiseMax(0.0); }

std::vector<Mat> forward_all(const MlpParams& params, const Mat& input) {
  std::vector<Mat> acts;
  acts.reserve(params.layers.size() + 1);
  acts.push_back(input);
  for (const auto& layer : params.layers) {
    ConstWeightMap w(layer.weight.data(), static_cast<Eigen::Index>(layer.out),
                     static_cast<Eigen::Index>(layer.in));
    Eigen::Map<const Vec> b(layer.bias.data(), static_cast<Eigen::Index>(layer.out));
    Mat z = w * acts.back();
    z.colwise() += b;
    switch (layer.activation) {
      case Activation::kRelu:
        relu_inplace(z);
        break;
      case Activation::kSoftmax:
        softmax_columns(z);
        break;
      case Activation::kIdentity:
        break;
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

void backward(const MlpParams& params, const std::vector<Mat>& activations, Mat grad_out,
              std::span<double> grad) {
  // Offsets of each layer's block in the flat gradient.
  std::vector<std::size_t> offsets(params.layers.size());
  std::size_t offset = 0;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    offsets[l] = offset;
    offset += params.layers[l].weight.size() + params.layers[l].bias.size();
  }
  Mat delta = std::move(grad_out);
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const auto& layer = params.layers[l];
    const auto out = static_cast<Eigen::Index>(layer.out);
    const auto in = static_cast<Eigen::Index>(layer.in);
    WeightMap gw(grad.data() + offsets[l], out, in);
    Eigen::Map<Vec> gb(grad.data() + offsets[l] + layer.weight.size(), out);
    gw += delta * activations[l].transpose();
    gb += delta.rowwise().sum();
    if (l == 0) break;
    ConstWeightMap w(layer.weight.data(), out, in);
    Mat upstream = w.transpose() * delta;
    if (params.layers[l - 1].activation == Activation::kRelu) {
      upstream = upstream.cwiseProduct((activations[l].array() > 0.0).cast<double>().matrix());
    }
    delta = std::move(upstream);
  }
}

DenseLayer make_layer(std::size_t in, std::size_t out, Activation activation, double init_scale,
                      std::mt19937_64& rng) {
  DenseLayer layer;
  layer.in = in;
  layer.out = out;
  layer.activation = activation;
  layer.weight.resize(in * out);
  layer.bias.assign(out, 0.0);
  const double scale = init_scale / std::sqrt(static_cast<double>(in));
  for (auto& w : layer.weight) w = scale * standard_normal(rng);
  return layer;
}

void RmsProp::step(std::span<double> params, std::span<const double> grad) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    cache_[i] = decay_ * cache_[i] + (1.0 - decay_) * grad[i] * grad[i];
    params[i] -= lr_ * grad[i] / (std::sqrt(cache_[i]) + eps_);
  }
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  constexpr double b1 = 0.9, b2 = 0.999;
  beta1_pow_ *= b1;
  beta2_pow_ *= b2;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = m_[i] / (1.0 - beta1_pow_);
    const double vhat = v_[i] / (1.0 - beta2_pow_);
    params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

}  // namespace ctrex::detail
