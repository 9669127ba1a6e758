#pragma once

// Eigen helpers shared by the classifier and VAE trainers. Internal only.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ctrex/blackbox.hpp"
#include "ctrex/matrix.hpp"
#include "ctrex/random.hpp"

namespace ctrex::detail {

using Mat = Eigen::MatrixXd;  // features x samples
using Vec = Eigen::VectorXd;
using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeightMap = Eigen::Map<const RowMajorMat>;
using WeightMap = Eigen::Map<RowMajorMat>;

/// Copies the rows of `m` as columns.
Mat to_columns(const RowMatrix& m);
Mat to_columns(const RowMatrix& m, std::span<const std::size_t> rows);
RowMatrix from_columns(const Mat& m);

void softmax_columns(Mat& logits);
void relu_inplace(Mat& m);

/// Output of every layer, starting with the input itself.
std::vector<Mat> forward_all(const MlpParams& params, const Mat& input);

/// Backpropagates `grad_out` (gradient wrt the pre-activation of the final
/// layer) through the network and writes parameter gradients in flatten()
/// order into `grad`.
void backward(const MlpParams& params, const std::vector<Mat>& activations, Mat grad_out,
              std::span<double> grad);

DenseLayer make_layer(std::size_t in, std::size_t out, Activation activation, double init_scale,
                      std::mt19937_64& rng);

/// Running RMSProp state over a flat parameter vector.
class RmsProp {
 public:
  RmsProp(std::size_t n, double lr, double decay, double eps)
      : cache_(n, 0.0), lr_(lr), decay_(decay), eps_(eps) {}
  void step(std::span<double> params, std::span<const double> grad);

 private:
  std::vector<double> cache_;
  double lr_, decay_, eps_;
};

/// Adam over a flat parameter vector (beta1 0.9, beta2 0.999).
class Adam {
 public:
  Adam(std::size_t n, double lr, double eps = 1e-8) : m_(n, 0.0), v_(n, 0.0), lr_(lr), eps_(eps) {}
  void step(std::span<double> params, std::span<const double> grad);

 private:
  std::vector<double> m_, v_;
  double lr_, eps_;
  double beta1_pow_ = 1.0, beta2_pow_ = 1.0;
};

using ::ctrex::permutation;
using ::ctrex::standard_normal;

}  // namespace ctrex::detail
