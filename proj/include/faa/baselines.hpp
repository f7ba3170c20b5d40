// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "faa/datagen.hpp"
#include "faa/fedauth.hpp"
#include "faa/nn.hpp"
#include "faa/protocol.hpp"

namespace faa::baselines {

struct FedAvgConfig {
  int rounds = 10;
  int local_epochs = 1;
  int batch_size = 64;
  double learning_rate = 0.001;
  double momentum = 0.9;
  /// Fraction of devices sampled each round.
  double participation = 1.0;

  void validate() const;
};

/// sum_i w_i p_i / sum_i w_i, computed per coordinate.
std::vector<double> weighted_average(std::span<const std::vector<double>> params, std::span<const double> weights);

struct FedAvgResult {
  nn::Network global;
  proto::Transcript transcript{proto::Method::fedavg};
};

/// Each round broadcasts the global parameters to the sampled devices, runs
/// `local_epochs` of SGD-momentum per device (fresh optimizer state each
/// round) and replaces the global parameters with the n_i-weighted average.
/// Devices with no data are skipped with a warning on stderr.
FedAvgResult fedavg_train(std::span<const proto::DeviceState> devices, const nn::Network& init,
                          const FedAvgConfig& cfg, std::uint64_t seed);

struct SplitConfig {
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 0.001;
  double momentum = 0.9;
  std::size_t cut = 2;

  void validate() const;
};

/// Parameter gradients of one batch computed through the cut: the device
/// runs its part, the server backpropagates through its part and returns
/// activation gradients, the device finishes the chain. Layers are ordered
/// device part first.
struct SplitStep {
  proto::ActivationBatch uplink;
  proto::GradientBatch downlink;
  nn::Gradients device_grads;
  nn::Gradients server_grads;
  double loss;
};

SplitStep split_step(const nn::Network& device_part, const nn::Network& server_part, const Matrix& x,
                     std::span<const int> labels);

struct SplitResult {
  fedauth::AuthModel model;
  proto::Transcript transcript{proto::Method::split_learning};
  std::vector<double> epoch_losses;
  std::size_t batches = 0;
  std::size_t handoffs = 0;
};

/// Devices train in ascending id order each epoch. Whenever the active
/// device changes, its device-side weights are relayed through the server
/// to the next one. At the end the last device uploads F and the server
/// sends F and C to every device.
SplitResult split_learning_train(std::span<const proto::DeviceState> devices, const nn::Network& device_template,
                                 const nn::Network& server_model, const SplitConfig& cfg);

/// Splits `model` at cfg.cut and calls the overload above.
SplitResult split_learning_train(std::span<const proto::DeviceState> devices, const nn::Network& model,
                                 const SplitConfig& cfg);

/// Mahalanobis-distance one-class model of a single user in feature space.
struct OneClassModel {
  int user_id = 0;
  Vector mu;
  Matrix sigma_inv;
  double threshold = 0.0;
};

/// Fits (mu, (Sigma + reg_eps * I)^-1) on F(x) of one user's samples.
OneClassModel oneclass_fit(const nn::Network& extractor, const data::LabeledDataset& user_data, double reg_eps);
OneClassModel oneclass_fit_features(const Matrix& features, int user_id, double reg_eps);

/// sqrt((f - mu)^T Sigma^-1 (f - mu)) with f = F(x); higher means less
/// likely to be the enrolled user.
double oneclass_score(const OneClassModel& model, const nn::Network& extractor, const Vector& x);
std::vector<double> oneclass_scores(const OneClassModel& model, const nn::Network& extractor, const Matrix& x);
double mahalanobis(const OneClassModel& model, const Vector& feature);

}  // namespace faa::baselines
