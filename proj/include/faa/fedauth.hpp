// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "faa/datagen.hpp"
#include "faa/impression.hpp"
#include "faa/nn.hpp"
#include "faa/protocol.hpp"

namespace faa::fedauth {

struct FaaConfig {
  /// Synthetic features drawn per user on the server.
  int samples_per_user = 500;
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 0.001;
  double momentum = 0.9;
  double cov_reg_eps = 1e-6;
  /// Estimate and transmit only the covariance diagonal.
  bool diagonal_covariance = false;

  void validate() const;
  nn::TrainConfig train_config() const { return {epochs, batch_size, learning_rate, momentum}; }
};

/// Feature extractor plus K-way classifier; scores are computed on-device.
struct AuthModel {
  nn::Network extractor;
  nn::Network classifier;
  int num_users = 0;

  /// Throws ShapeError unless the classifier consumes the extractor's output
  /// and emits `num_users` logits.
  void validate() const;

  Matrix logits(const Matrix& x) const;

  bool operator==(const AuthModel&) const = default;
};

nlohmann::json to_json(const AuthModel& model);
AuthModel auth_model_from_json(const nlohmann::json& j);
void save_auth_model(const AuthModel& model, const std::filesystem::path& path);
AuthModel load_auth_model(const std::filesystem::path& path);

nlohmann::json to_json(const nn::Network& net);
nn::Network network_from_json(const nlohmann::json& j);

/// Trains every layer of `net` on the base dataset. Throws ConfigError if the
/// output dimension differs from the base class count.
nn::Network train_base(nn::Network net, const data::LabeledDataset& base, const nn::TrainConfig& cfg, Rng& rng);

/// Mean and population covariance (1/n normalization) of F over the rows of
/// `features`.
UserImpression impression_from_features(const Matrix& features, int user_id, bool diagonal = false);

/// Runs F on every sample of one user's device data and summarizes it.
UserImpression estimate_impression(const nn::Network& extractor, const data::LabeledDataset& device_data,
                                   bool diagonal = false);

struct CholeskyFactor {
  Matrix lower;
  /// Ridge actually added to the diagonal.
  double jitter = 0.0;
};

/// Lower factor of sigma + jitter * I with jitter = eps * max(trace/d, 1),
/// retried with jitter * 10 up to three more times before NumericError.
CholeskyFactor chol_psd(const Matrix& sigma, double eps = 1e-6);

struct SampledFeatures {
  Matrix features;
  std::vector<int> labels;
};

/// `count` draws of mu + L z with z standard normal from `rng`.
SampledFeatures sample_user_features(const UserImpression& imp, std::size_t count, Rng& rng, double eps = 1e-6);

/// Requires impressions for user ids 0..K-1 exactly once.
void check_impression_cover(std::span<const UserImpression> impressions);

/// K x M synthetic training set, ordered by user id. Each user draws from
/// its own substream of `seed`.
data::LabeledDataset build_server_dataset(std::span<const UserImpression> impressions, const FaaConfig& cfg,
                                          std::uint64_t seed);

/// Trains `classifier` on build_server_dataset(impressions). E = 0 leaves it
/// unchanged.
nn::Network train_server_classifier(nn::Network classifier, std::span<const UserImpression> impressions,
                                    const FaaConfig& cfg, std::uint64_t seed);

struct FaaResult {
  AuthModel model;
  proto::Transcript transcript{proto::Method::faa};
};

/// Steps 2 and 3 from an already trained base model: broadcast F, gather one
/// impression per device, fine-tune C on resampled features, broadcast C.
/// The classifier's output layer is re-initialized with K outputs.
FaaResult faa_train_pretrained(std::span<const proto::DeviceState> devices, const nn::Network& base_model,
                               const FaaConfig& cfg, std::size_t cut, std::uint64_t seed);

/// Full pipeline: train `model` on `base_data` (step 1), split at `cut`, then
/// faa_train_pretrained.
FaaResult faa_train(std::span<const proto::DeviceState> devices, const data::LabeledDataset& base_data,
                    nn::Network model, const nn::TrainConfig& base_cfg, const FaaConfig& cfg, std::size_t cut,
                    std::uint64_t seed);

}  // namespace faa::fedauth
