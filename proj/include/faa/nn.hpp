// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "faa/rng.hpp"

namespace faa {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace faa

namespace faa::nn {

enum class Activation { relu, identity };

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::identity;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

/// Ordered stack of dense layers. Adjacent dimensions always chain; the
/// constructor rejects anything else.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<DenseLayer> layers);

  /// Glorot-uniform weights, zero biases. Hidden layers use relu, the final
  /// layer is identity so it emits logits. `dims` = {in, h1, ..., out}.
  static Network random(std::span<const std::size_t> dims, Rng& rng);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }

  std::size_t layer_count() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }
  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;

  std::size_t parameter_count() const;
  std::vector<double> flatten_parameters() const;
  void assign_parameters(std::span<const double> values);

  /// Replace the last layer with a freshly initialized identity layer with
  /// `out_dim` outputs.
  void reset_head(Eigen::Index out_dim, Rng& rng);

  /// Throws ShapeError if the layer dimensions do not chain or values are
  /// non-finite.
  void validate() const;

  bool operator==(const Network& other) const;

 private:
  std::vector<DenseLayer> layers_;
};

DenseLayer glorot_layer(Eigen::Index in, Eigen::Index out, Activation act, Rng& rng);

/// Activations recorded by forward(); consumed by backward().
struct ForwardCache {
  std::vector<Matrix> inputs;  // input to layer t
  std::vector<Matrix> pre;     // pre-activation of layer t
};

struct LayerGrad {
  Matrix weights;
  Vector bias;
};

struct Gradients {
  std::vector<LayerGrad> layers;
  /// d(loss_j)/d(input_j) per sample, not batch-averaged.
  Matrix input;
};

/// Rows of `x` are samples.
Matrix forward(const Network& net, const Matrix& x, ForwardCache* cache = nullptr);

/// Parameter gradients are mean-reduced over the batch. `dlogits` holds the
/// per-sample loss gradient with respect to the network output.
Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& dlogits);

struct LossGrad {
  double loss;
  Vector dlogits;
};

Vector softmax(const Eigen::Ref<const Vector>& logits);
Matrix softmax_rows(const Matrix& logits);

/// Cross-entropy of softmax(logits) against `label`, with the gradient
/// softmax - onehot. Probabilities are clamped at 1e-12 before the log.
LossGrad softmax_xent(const Eigen::Ref<const Vector>& logits, int label);

struct BatchLoss {
  double mean_loss;
  Matrix dlogits;  // per-sample rows
};

BatchLoss softmax_xent(const Matrix& logits, std::span<const int> labels);

/// Natural-log Shannon entropy with 0 ln 0 = 0.
double entropy(std::span<const double> p);
inline double entropy(const Vector& p) { return entropy(std::span<const double>(p.data(), p.size())); }

/// Index of the largest entry; ties resolve to the lowest index.
Eigen::Index argmax(const Eigen::Ref<const Vector>& v);

/// Classical momentum: v <- momentum * v + g; theta <- theta - lr * v.
class OptimizerState {
 public:
  OptimizerState(double learning_rate, double momentum);

  double learning_rate() const { return learning_rate_; }
  double momentum() const { return momentum_; }
  const std::vector<LayerGrad>& velocity() const { return velocity_; }

  void step(Network& net, const Gradients& grads);

 private:
  double learning_rate_;
  double momentum_;
  std::vector<LayerGrad> velocity_;
};

inline void sgd_step(Network& net, const Gradients& grads, OptimizerState& opt) {
  opt.step(net, grads);
}

struct TrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 0.001;
  double momentum = 0.9;
};

/// Minibatch SGD-momentum over (x, labels), reshuffling each epoch from
/// `rng`. Returns the mean training loss of every epoch.
std::vector<double> train_sgd(Network& net, const Matrix& x, std::span<const int> labels,
                              const TrainConfig& cfg, Rng& rng);

/// Mean cross-entropy of `net` on the batch.
double mean_loss(const Network& net, const Matrix& x, std::span<const int> labels);

double accuracy(const Network& net, const Matrix& x, std::span<const int> labels);

/// Max relative error between `analytic` and central differences of the
/// mean cross-entropy: |a - cd| / max(|a|, |cd|, 1e-8).
double gradient_error(const Network& net, const Matrix& x, std::span<const int> labels,
                      const Gradients& analytic, double eps = 1e-5);

/// gradient_error() against backward()'s own gradients.
double grad_check(const Network& net, const Matrix& x, std::span<const int> labels,
                  double eps = 1e-5);

/// Smallest |pre-activation| over relu units on this batch. Finite
/// differences are only meaningful when it exceeds the probe step.
double relu_margin(const Network& net, const Matrix& x);

/// Layers [0, cut) become the feature extractor, [cut, end) the classifier.
std::pair<Network, Network> split_model(const Network& net, std::size_t cut);

/// Layers of `front` followed by layers of `back`.
Network concat(const Network& front, const Network& back);

}  // namespace faa::nn
