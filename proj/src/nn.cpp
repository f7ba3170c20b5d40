// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "faa/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "faa/error.hpp"

namespace faa::nn {

namespace {

constexpr double kProbFloor = 1e-12;

std::string dims_str(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void apply_activation(Activation act, Matrix& z) {
  if (act == Activation::relu) z = z.cwiseMax(0.0);
}

}  // namespace

Network::Network(std::vector<DenseLayer> layers) : layers_(std::move(layers)) { validate(); }

Network Network::random(std::span<const std::size_t> dims, Rng& rng) {
  if (dims.size() < 2) throw InputError("network needs at least input and output dims");
  std::vector<DenseLayer> layers;
  for (std::size_t t = 0; t + 1 < dims.size(); ++t) {
    if (dims[t] == 0 || dims[t + 1] == 0) throw InputError("layer dims must be positive");
    const bool last = t + 2 == dims.size();
    layers.push_back(glorot_layer(static_cast<Eigen::Index>(dims[t]),
                                  static_cast<Eigen::Index>(dims[t + 1]),
                                  last ? Activation::identity : Activation::relu, rng));
  }
  return Network(std::move(layers));
}

DenseLayer glorot_layer(Eigen::Index in, Eigen::Index out, Activation act, Rng& rng) {
  DenseLayer layer;
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  layer.weights.resize(out, in);
  for (Eigen::Index i = 0; i < layer.weights.size(); ++i)
    layer.weights.data()[i] = rng.uniform(-limit, limit);
  layer.bias = Vector::Zero(out);
  layer.activation = act;
  return layer;
}

Eigen::Index Network::input_dim() const {
  if (layers_.empty()) throw ShapeError("empty network has no input dim");
  return layers_.front().in_dim();
}

Eigen::Index Network::output_dim() const {
  if (layers_.empty()) throw ShapeError("empty network has no output dim");
  return layers_.back().out_dim();
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

std::vector<double> Network::flatten_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    out.insert(out.end(), l.weights.data(), l.weights.data() + l.weights.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

void Network::assign_parameters(std::span<const double> values) {
  if (values.size() != parameter_count())
    throw ShapeError("parameter vector has " + std::to_string(values.size()) + " values, network has " +
                     std::to_string(parameter_count()));
  std::size_t k = 0;
  for (auto& l : layers_) {
    std::copy_n(values.data() + k, l.weights.size(), l.weights.data());
    k += static_cast<std::size_t>(l.weights.size());
    std::copy_n(values.data() + k, l.bias.size(), l.bias.data());
    k += static_cast<std::size_t>(l.bias.size());
  }
}

void Network::reset_head(Eigen::Index out_dim, Rng& rng) {
  if (layers_.empty()) throw ShapeError("cannot reset head of an empty network");
  layers_.back() = glorot_layer(layers_.back().in_dim(), out_dim, Activation::identity, rng);
}

void Network::validate() const {
  for (std::size_t t = 0; t < layers_.size(); ++t) {
    const auto& l = layers_[t];
    if (l.bias.size() != l.out_dim())
      throw ShapeError("layer " + std::to_string(t) + ": bias length " + std::to_string(l.bias.size()) +
                       " != out dim " + std::to_string(l.out_dim()));
    if (t > 0 && l.in_dim() != layers_[t - 1].out_dim())
      throw ShapeError("layer " + std::to_string(t) + " input dim " + std::to_string(l.in_dim()) +
                       " does not chain with previous output " + std::to_string(layers_[t - 1].out_dim()));
    if (!l.weights.allFinite() || !l.bias.allFinite())
      throw ShapeError("layer " + std::to_string(t) + " holds non-finite values");
  }
}

bool Network::operator==(const Network& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t t = 0; t < layers_.size(); ++t) {
    const auto& a = layers_[t];
    const auto& b = other.layers_[t];
    if (a.activation != b.activation || a.weights.rows() != b.weights.rows() ||
        a.weights.cols() != b.weights.cols() || a.weights != b.weights || a.bias != b.bias)
      return false;
  }
  return true;
}

Matrix forward(const Network& net, const Matrix& x, ForwardCache* cache) {
  if (net.empty()) throw ShapeError("forward through an empty network");
  if (x.cols() != net.input_dim())
    throw ShapeError("input has " + std::to_string(x.cols()) + " columns, network expects " +
                     std::to_string(net.input_dim()));
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix a = x;
  for (const auto& layer : net.layers()) {
    Matrix z = a * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre.push_back(z);
    }
    apply_activation(layer.activation, z);
    a = std::move(z);
  }
  return a;
}

Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& dlogits) {
  const std::size_t n_layers = net.layer_count();
  if (cache.inputs.size() != n_layers || cache.pre.size() != n_layers)
    throw ShapeError("cache holds " + std::to_string(cache.inputs.size()) + " layers, network has " +
                     std::to_string(n_layers));
  for (std::size_t t = 0; t < n_layers; ++t) {
    const auto& l = net.layer(t);
    if (cache.inputs[t].cols() != l.in_dim() || cache.pre[t].cols() != l.out_dim())
      throw ShapeError("stale cache at layer " + std::to_string(t));
  }
  const Eigen::Index batch = cache.inputs.front().rows();
  if (dlogits.rows() != batch || dlogits.cols() != net.output_dim())
    throw ShapeError("dlogits " + dims_str(dlogits.rows(), dlogits.cols()) + " does not match output " +
                     dims_str(batch, net.output_dim()));

  Gradients g;
  g.layers.resize(n_layers);
  const double inv_batch = batch > 0 ? 1.0 / static_cast<double>(batch) : 0.0;
  Matrix delta = dlogits;
  for (std::size_t t = n_layers; t-- > 0;) {
    const auto& l = net.layer(t);
    if (l.activation == Activation::relu)
      delta = delta.cwiseProduct((cache.pre[t].array() > 0.0).cast<double>().matrix());
    g.layers[t].weights = (delta.transpose() * cache.inputs[t]) * inv_batch;
    g.layers[t].bias = delta.colwise().sum().transpose() * inv_batch;
    delta = delta * l.weights;
  }
  g.input = std::move(delta);
  return g;
}

Vector softmax(const Eigen::Ref<const Vector>& logits) {
  // Scalar std::exp and a left-to-right sum so scores do not depend on the
  // SIMD width Eigen picks.
  const double m = logits.maxCoeff();
  Vector p(logits.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) sum += p[i] = std::exp(logits[i] - m);
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] /= sum;
  return p;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) p.row(r) = softmax(logits.row(r).transpose()).transpose();
  return p;
}

LossGrad softmax_xent(const Eigen::Ref<const Vector>& logits, int label) {
  if (label < 0 || label >= logits.size())
    throw InputError("label " + std::to_string(label) + " outside [0, " + std::to_string(logits.size()) + ")");
  const double m = logits.maxCoeff();
  const Vector shifted = logits.array() - m;
  const double log_z = std::log(shifted.array().exp().sum());
  const double log_p = shifted[label] - log_z;
  LossGrad out;
  out.loss = std::min(-log_p, -std::log(kProbFloor));
  out.dlogits = (shifted.array() - log_z).exp();
  out.dlogits[label] -= 1.0;
  return out;
}

BatchLoss softmax_xent(const Matrix& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size())
    throw ShapeError("logits have " + std::to_string(logits.rows()) + " rows, got " +
                     std::to_string(labels.size()) + " labels");
  BatchLoss out{0.0, Matrix(logits.rows(), logits.cols())};
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    auto lg = softmax_xent(logits.row(r).transpose(), labels[static_cast<std::size_t>(r)]);
    out.mean_loss += lg.loss;
    out.dlogits.row(r) = lg.dlogits.transpose();
  }
  if (logits.rows() > 0) out.mean_loss /= static_cast<double>(logits.rows());
  return out;
}

double entropy(std::span<const double> p) {
  if (p.empty()) throw InputError("entropy of an empty vector");
  double sum = 0.0;
  double h = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw InputError("probability vector has a negative or NaN component");
    sum += v;
    if (v > 0.0) h -= v * std::log(v);
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("probability vector sums to " + std::to_string(sum));
  return h;
}

Eigen::Index argmax(const Eigen::Ref<const Vector>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

OptimizerState::OptimizerState(double learning_rate, double momentum)
    : learning_rate_(learning_rate), momentum_(momentum) {
  if (!(learning_rate > 0.0)) throw InputError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InputError("momentum must lie in [0, 1)");
}

void OptimizerState::step(Network& net, const Gradients& grads) {
  if (grads.layers.size() != net.layer_count()) throw ShapeError("gradient layer count mismatch");
  if (velocity_.empty()) {
    for (const auto& l : net.layers())
      velocity_.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()), Vector::Zero(l.bias.size())});
  }
  if (velocity_.size() != net.layer_count()) throw ShapeError("optimizer state belongs to another network");
  for (std::size_t t = 0; t < net.layer_count(); ++t) {
    auto& l = net.layers()[t];
    auto& v = velocity_[t];
    const auto& g = grads.layers[t];
    if (g.weights.rows() != l.weights.rows() || g.weights.cols() != l.weights.cols() ||
        g.bias.size() != l.bias.size() || v.weights.rows() != l.weights.rows() ||
        v.weights.cols() != l.weights.cols())
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(t));
    v.weights = momentum_ * v.weights + g.weights;
    v.bias = momentum_ * v.bias + g.bias;
    l.weights -= learning_rate_ * v.weights;
    l.bias -= learning_rate_ * v.bias;
  }
}

std::vector<double> train_sgd(Network& net, const Matrix& x, std::span<const int> labels,
                              const TrainConfig& cfg, Rng& rng) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ShapeError("sample/label count mismatch");
  if (cfg.batch_size <= 0) throw InputError("batch size must be positive");
  std::vector<double> epoch_losses;
  if (cfg.epochs <= 0 || x.rows() == 0) return epoch_losses;

  OptimizerState opt(cfg.learning_rate, cfg.momentum);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  ForwardCache cache;
  for (int e = 0; e < cfg.epochs; ++e) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t n = std::min(bs, order.size() - start);
      Matrix xb(static_cast<Eigen::Index>(n), x.cols());
      std::vector<int> yb(n);
      for (std::size_t i = 0; i < n; ++i) {
        xb.row(static_cast<Eigen::Index>(i)) = x.row(order[start + i]);
        yb[i] = labels[static_cast<std::size_t>(order[start + i])];
      }
      const Matrix logits = forward(net, xb, &cache);
      const auto lg = softmax_xent(logits, yb);
      loss_sum += lg.mean_loss * static_cast<double>(n);
      opt.step(net, backward(net, cache, lg.dlogits));
    }
    epoch_losses.push_back(loss_sum / static_cast<double>(order.size()));
  }
  return epoch_losses;
}

double mean_loss(const Network& net, const Matrix& x, std::span<const int> labels) {
  return softmax_xent(forward(net, x), labels).mean_loss;
}

double accuracy(const Network& net, const Matrix& x, std::span<const int> labels) {
  if (x.rows() == 0) return 0.0;
  const Matrix logits = forward(net, x);
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r)
    if (argmax(logits.row(r).transpose()) == labels[static_cast<std::size_t>(r)]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(x.rows());
}

double gradient_error(const Network& net, const Matrix& x, std::span<const int> labels,
                      const Gradients& analytic, double eps) {
  if (!(eps > 0.0)) throw InputError("finite-difference step must be positive");
  if (analytic.layers.size() != net.layer_count()) throw ShapeError("gradient layer count mismatch");
  Network probe = net;
  double worst = 0.0;
  auto check = [&](double& param, double a) {
    const double saved = param;
    param = saved + eps;
    const double up = mean_loss(probe, x, labels);
    param = saved - eps;
    const double down = mean_loss(probe, x, labels);
    param = saved;
    const double cd = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(a), std::abs(cd), 1e-8});
    worst = std::max(worst, std::abs(a - cd) / denom);
  };
  for (std::size_t t = 0; t < probe.layer_count(); ++t) {
    auto& l = probe.layers()[t];
    const auto& g = analytic.layers[t];
    if (g.weights.rows() != l.weights.rows() || g.weights.cols() != l.weights.cols() ||
        g.bias.size() != l.bias.size())
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(t));
    for (Eigen::Index i = 0; i < l.weights.size(); ++i) check(l.weights.data()[i], g.weights.data()[i]);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) check(l.bias[i], g.bias[i]);
  }
  return worst;
}

double grad_check(const Network& net, const Matrix& x, std::span<const int> labels, double eps) {
  ForwardCache cache;
  const Matrix logits = forward(net, x, &cache);
  const auto lg = softmax_xent(logits, labels);
  return gradient_error(net, x, labels, backward(net, cache, lg.dlogits), eps);
}

double relu_margin(const Network& net, const Matrix& x) {
  ForwardCache cache;
  forward(net, x, &cache);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < net.layer_count(); ++t)
    if (net.layer(t).activation == Activation::relu)
      margin = std::min(margin, cache.pre[t].cwiseAbs().minCoeff());
  return margin;
}

std::pair<Network, Network> split_model(const Network& net, std::size_t cut) {
  if (cut == 0 || cut >= net.layer_count())
    throw InputError("cut " + std::to_string(cut) + " outside (0, " + std::to_string(net.layer_count()) + ")");
  const auto& ls = net.layers();
  const auto mid = ls.begin() + static_cast<std::ptrdiff_t>(cut);
  return {Network({ls.begin(), mid}), Network({mid, ls.end()})};
}

Network concat(const Network& front, const Network& back) {
  std::vector<DenseLayer> ls = front.layers();
  ls.insert(ls.end(), back.layers().begin(), back.layers().end());
  return Network(std::move(ls));
}

}  // namespace faa::nn
