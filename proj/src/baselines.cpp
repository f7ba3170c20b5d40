// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "faa/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <optional>

#include "faa/error.hpp"
#include "faa/parallel.hpp"

namespace faa::baselines {

using proto::Direction;

void FedAvgConfig::validate() const {
  if (rounds < 0) throw ConfigError("fedavg.rounds must be >= 0");
  if (local_epochs < 0) throw ConfigError("fedavg.local_epochs must be >= 0");
  if (batch_size <= 0) throw ConfigError("fedavg.batch_size must be > 0");
  if (!(learning_rate > 0.0)) throw ConfigError("fedavg.learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("fedavg.momentum must lie in [0, 1)");
  if (!(participation > 0.0 && participation <= 1.0)) throw ConfigError("fedavg.participation must lie in (0, 1]");
}

void SplitConfig::validate() const {
  if (epochs < 0) throw ConfigError("split_learning.epochs must be >= 0");
  if (batch_size <= 0) throw ConfigError("split_learning.batch_size must be > 0");
  if (!(learning_rate > 0.0)) throw ConfigError("split_learning.learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("split_learning.momentum must lie in [0, 1)");
  if (cut == 0) throw ConfigError("split_learning.cut must be > 0");
}

std::vector<double> weighted_average(std::span<const std::vector<double>> params, std::span<const double> weights) {
  if (params.empty() || params.size() != weights.size())
    throw InputError("need one weight per parameter vector");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || std::any_of(weights.begin(), weights.end(), [](double w) { return w < 0.0; }))
    throw InputError("averaging weights must be non-negative with a positive sum");
  const std::size_t n = params.front().size();
  for (const auto& p : params)
    if (p.size() != n) throw ShapeError("parameter vectors differ in length");

  // Anchored at the first vector so identical inputs average to themselves
  // bit-exactly; clamping keeps rounding inside the convex hull.
  std::vector<double> out(params.front());
  for (std::size_t j = 0; j < n; ++j) {
    double lo = out[j];
    double hi = out[j];
    double delta = 0.0;
    for (std::size_t i = 1; i < params.size(); ++i) {
      const double v = params[i][j];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      delta += (weights[i] / total) * (v - params.front()[j]);
    }
    out[j] = std::clamp(out[j] + delta, lo, hi);
  }
  return out;
}

namespace {

void check_labels(std::span<const proto::DeviceState> devices, Eigen::Index num_outputs, const char* method) {
  for (const auto& d : devices)
    for (int y : d.local_data.y)
      if (y < 0 || y >= num_outputs)
        throw ConfigError(std::string(method) + ": device " + std::to_string(d.device_id) + " label " +
                          std::to_string(y) + " outside the " + std::to_string(num_outputs) + "-way head");
}

std::vector<std::size_t> non_empty_devices(std::span<const proto::DeviceState> devices, const char* method) {
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (devices[i].local_data.empty())
      std::cerr << "warning: " << method << ": device " << devices[i].device_id << " has no data, skipped\n";
    else
      active.push_back(i);
  }
  return active;
}

}  // namespace

FedAvgResult fedavg_train(std::span<const proto::DeviceState> devices, const nn::Network& init,
                          const FedAvgConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (devices.empty()) throw ConfigError("fedavg needs at least one device");
  check_labels(devices, init.output_dim(), "fedavg");
  const auto active = non_empty_devices(devices, "fedavg");

  FedAvgResult result;
  result.global = init;
  auto& transcript = result.transcript;
  if (cfg.rounds == 0) {
    const auto params = proto::ModelParams::of(result.global);
    for (std::size_t i : active) transcript.record(Direction::server_to_device, devices[i].device_id, 0, params);
    return result;
  }

  Rng participation_rng(derive_seed(seed, "fedavg-participation"));
  const nn::TrainConfig local_cfg{cfg.local_epochs, cfg.batch_size, cfg.learning_rate, cfg.momentum};
  for (int r = 0; r < cfg.rounds; ++r) {
    std::vector<std::size_t> chosen = active;
    if (cfg.participation < 1.0 && !chosen.empty()) {
      const auto m = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::lround(cfg.participation * static_cast<double>(chosen.size()))));
      participation_rng.shuffle(chosen);
      chosen.resize(std::min(m, chosen.size()));
      std::sort(chosen.begin(), chosen.end());
    }
    if (chosen.empty()) break;

    const auto global_params = proto::ModelParams::of(result.global);
    for (std::size_t i : chosen) transcript.record(Direction::server_to_device, devices[i].device_id, r, global_params);

    std::vector<std::optional<proto::ModelParams>> replies(chosen.size());
    parallel_for(chosen.size(), [&](std::size_t c) {
      const auto& dev = devices[chosen[c]];
      nn::Network local = result.global;
      global_params.load_into(local);
      Rng rng(derive_seed(dev.rng_seed, static_cast<std::uint64_t>(r)));
      nn::train_sgd(local, dev.local_data.x, dev.local_data.y, local_cfg, rng);
      replies[c] = proto::ModelParams::of(local);
    });

    std::vector<std::vector<double>> params;
    std::vector<double> weights;
    for (std::size_t c = 0; c < chosen.size(); ++c) {
      transcript.record(Direction::device_to_server, devices[chosen[c]].device_id, r, *replies[c]);
      params.push_back(replies[c]->values());
      weights.push_back(static_cast<double>(devices[chosen[c]].local_data.size()));
    }
    result.global.assign_parameters(weighted_average(params, weights));
  }
  return result;
}

SplitStep split_step(const nn::Network& device_part, const nn::Network& server_part, const Matrix& x,
                     std::span<const int> labels) {
  // Device: forward to the cut.
  nn::ForwardCache device_cache;
  auto uplink = proto::ActivationBatch::compute(device_part, x, labels, device_cache);

  // Server: finish the forward pass, backpropagate to the cut.
  nn::ForwardCache server_cache;
  const Matrix logits = nn::forward(server_part, uplink.activations(), &server_cache);
  const auto lg = nn::softmax_xent(logits, uplink.labels());
  auto server_grads = nn::backward(server_part, server_cache, lg.dlogits);
  proto::GradientBatch downlink(server_grads.input);

  // Device: continue the chain rule from the returned activation gradients.
  auto device_grads = nn::backward(device_part, device_cache, downlink.grads());
  return {std::move(uplink), std::move(downlink), std::move(device_grads), std::move(server_grads), lg.mean_loss};
}

SplitResult split_learning_train(std::span<const proto::DeviceState> devices, const nn::Network& device_template,
                                 const nn::Network& server_model, const SplitConfig& cfg) {
  cfg.validate();
  if (devices.empty()) throw ConfigError("split learning needs at least one device");
  if (cfg.cut != device_template.layer_count())
    throw ConfigError("split_learning.cut = " + std::to_string(cfg.cut) + " but device part has " +
                      std::to_string(device_template.layer_count()) + " layers");
  if (server_model.empty() || server_model.input_dim() != device_template.output_dim())
    throw ConfigError("server part does not consume the device part's output");
  check_labels(devices, server_model.output_dim(), "split learning");
  const auto active = non_empty_devices(devices, "split learning");

  SplitResult result;
  auto& transcript = result.transcript;
  nn::Network device_part = device_template;
  nn::Network server_part = server_model;
  nn::OptimizerState server_opt(cfg.learning_rate, cfg.momentum);
  std::optional<nn::OptimizerState> device_opt;

  int round = 0;
  std::optional<std::size_t> holder;
  if (!active.empty()) {
    holder = active.front();
    transcript.record(Direction::server_to_device, devices[*holder].device_id, round,
                      proto::ModelParams::of(device_part));
    device_opt.emplace(cfg.learning_rate, cfg.momentum);
  }

  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  for (int e = 0; e < cfg.epochs; ++e) {
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t i : active) {
      const auto& dev = devices[i];
      if (holder != i) {
        // Weight handoff: previous device -> server -> this device.
        const auto relay = proto::ModelParams::of(device_part);
        transcript.record(Direction::device_to_server, devices[*holder].device_id, round, relay);
        transcript.record(Direction::server_to_device, dev.device_id, round, relay);
        relay.load_into(device_part);
        ++round;
        ++result.handoffs;
        holder = i;
        device_opt.emplace(cfg.learning_rate, cfg.momentum);
      }
      Rng rng(derive_seed(dev.rng_seed, static_cast<std::uint64_t>(e)));
      std::vector<std::size_t> order(dev.local_data.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(order);
      for (std::size_t start = 0; start < order.size(); start += bs) {
        const std::span<const std::size_t> idx(order.data() + start, std::min(bs, order.size() - start));
        const auto batch = dev.local_data.subset(idx);
        auto step = split_step(device_part, server_part, batch.x, batch.y);
        transcript.record(Direction::device_to_server, dev.device_id, round, step.uplink);
        transcript.record(Direction::server_to_device, dev.device_id, round, step.downlink);
        server_opt.step(server_part, step.server_grads);
        device_opt->step(device_part, step.device_grads);
        loss_sum += step.loss * static_cast<double>(idx.size());
        seen += idx.size();
        ++round;
        ++result.batches;
      }
    }
    result.epoch_losses.push_back(seen > 0 ? loss_sum / static_cast<double>(seen) : 0.0);
  }

  if (holder) {
    const auto f_params = proto::ModelParams::of(device_part);
    transcript.record(Direction::device_to_server, devices[*holder].device_id, round, f_params);
    const auto c_params = proto::ModelParams::of(server_part);
    for (std::size_t i : active) {
      transcript.record(Direction::server_to_device, devices[i].device_id, round, f_params);
      transcript.record(Direction::server_to_device, devices[i].device_id, round, c_params);
    }
  }

  result.model = fedauth::AuthModel{std::move(device_part), std::move(server_part),
                                    static_cast<int>(server_model.output_dim())};
  result.model.validate();
  return result;
}

SplitResult split_learning_train(std::span<const proto::DeviceState> devices, const nn::Network& model,
                                 const SplitConfig& cfg) {
  if (cfg.cut == 0 || cfg.cut >= model.layer_count())
    throw ConfigError("split_learning.cut = " + std::to_string(cfg.cut) + " is not inside the " +
                      std::to_string(model.layer_count()) + "-layer network");
  auto [device_part, server_part] = nn::split_model(model, cfg.cut);
  return split_learning_train(devices, device_part, server_part, cfg);
}

OneClassModel oneclass_fit_features(const Matrix& features, int user_id, double reg_eps) {
  if (!(reg_eps >= 0.0)) throw InputError("one-class regularization must be non-negative");
  const auto imp = fedauth::impression_from_features(features, user_id);
  Matrix reg = imp.sigma;
  reg.diagonal().array() += reg_eps;
  Eigen::LLT<Matrix> llt(reg);
  if (llt.info() != Eigen::Success) throw NumericError("one-class covariance is singular after regularization");
  OneClassModel m;
  m.user_id = user_id;
  m.mu = imp.mu;
  m.sigma_inv = llt.solve(Matrix::Identity(reg.rows(), reg.cols()));
  m.sigma_inv = 0.5 * (m.sigma_inv + m.sigma_inv.transpose());
  if (!m.sigma_inv.allFinite()) throw NumericError("one-class inverse covariance is not finite");
  return m;
}

OneClassModel oneclass_fit(const nn::Network& extractor, const data::LabeledDataset& user_data, double reg_eps) {
  if (user_data.empty()) throw InputError("one-class fit needs at least one sample");
  const int user = user_data.y.front();
  if (std::any_of(user_data.y.begin(), user_data.y.end(), [&](int y) { return y != user; }))
    throw InputError("one-class fit data mixes several users");
  return oneclass_fit_features(nn::forward(extractor, user_data.x), user, reg_eps);
}

double mahalanobis(const OneClassModel& model, const Vector& feature) {
  if (feature.size() != model.mu.size()) throw ShapeError("feature dimension mismatch");
  const Vector diff = feature - model.mu;
  return std::sqrt(std::max(0.0, diff.dot(model.sigma_inv * diff)));
}

double oneclass_score(const OneClassModel& model, const nn::Network& extractor, const Vector& x) {
  const Matrix f = nn::forward(extractor, Matrix(x.transpose()));
  return mahalanobis(model, f.row(0).transpose());
}

std::vector<double> oneclass_scores(const OneClassModel& model, const nn::Network& extractor, const Matrix& x) {
  const Matrix f = nn::forward(extractor, x);
  std::vector<double> out(static_cast<std::size_t>(f.rows()));
  for (Eigen::Index r = 0; r < f.rows(); ++r) out[static_cast<std::size_t>(r)] = mahalanobis(model, f.row(r).transpose());
  return out;
}

}  // namespace faa::baselines
