// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "faa/datagen.hpp"
#include "faa/impression.hpp"
#include "faa/nn.hpp"

namespace faa::proto {

enum class Direction { device_to_server, server_to_device };
enum class PayloadKind { model_params, impression, activation_batch, gradient_batch, scalar };
enum class Method { faa, fedavg, split_learning };

std::string_view to_string(Direction d);
std::string_view to_string(PayloadKind k);
std::string_view to_string(Method m);

// Payload types. None of them can be built from raw samples: parameters come
// from a Network, impressions from statistics, activations from a forward
// pass through at least one device-side layer.

class ModelParams {
 public:
  static ModelParams of(const nn::Network& net);

  const std::vector<double>& values() const { return values_; }
  std::size_t size_units() const { return values_.size(); }
  /// Writes the parameters into `net`, which must have the same shape.
  void load_into(nn::Network& net) const;

 private:
  explicit ModelParams(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

class ImpressionPayload {
 public:
  static ImpressionPayload of(const UserImpression& imp);

  const UserImpression& impression() const { return imp_; }
  /// mu (d) + covariance (d*d, or d when diagonal) + sample count (1).
  std::size_t size_units() const;

 private:
  explicit ImpressionPayload(UserImpression imp) : imp_(std::move(imp)) {}
  UserImpression imp_;
};

class ActivationBatch {
 public:
  /// Runs `device_part` on `x` and packages the cut-layer activations with
  /// their labels. `cache` receives the device-side forward cache.
  static ActivationBatch compute(const nn::Network& device_part, const Matrix& x,
                                 std::span<const int> labels, nn::ForwardCache& cache);

  const Matrix& activations() const { return activations_; }
  const std::vector<int>& labels() const { return labels_; }
  std::size_t size_units() const { return static_cast<std::size_t>(activations_.size()) + labels_.size(); }

 private:
  ActivationBatch(Matrix a, std::vector<int> y) : activations_(std::move(a)), labels_(std::move(y)) {}
  Matrix activations_;
  std::vector<int> labels_;
};

class GradientBatch {
 public:
  explicit GradientBatch(Matrix g) : grads_(std::move(g)) {}
  const Matrix& grads() const { return grads_; }
  std::size_t size_units() const { return static_cast<std::size_t>(grads_.size()); }

 private:
  Matrix grads_;
};

struct Scalar {
  double value = 0.0;
  std::size_t size_units() const { return 1; }
};

using Payload = std::variant<ModelParams, ImpressionPayload, ActivationBatch, GradientBatch, Scalar>;

PayloadKind kind_of(const Payload& p);
std::size_t size_units(const Payload& p);

/// Kinds allowed on each direction. Gradients only ever flow downlink and
/// impressions / activations only uplink.
bool allowed(Direction d, PayloadKind k);

struct Message {
  Direction direction;
  int device_id;
  int round;
  PayloadKind kind;
  std::size_t size_units;

  bool operator==(const Message&) const = default;
};

/// Append-only log of every payload crossing the device/server boundary.
class Transcript {
 public:
  explicit Transcript(Method method) : method_(method) {}

  Method method() const { return method_; }
  const std::vector<Message>& messages() const { return messages_; }

  /// Throws InputError if the kind is not allowed on `direction` or if
  /// `round` is lower than the last round recorded for this device.
  void record(Direction direction, int device_id, int round, const Payload& payload);

  bool operator==(const Transcript&) const = default;

 private:
  Method method_;
  std::vector<Message> messages_;
  std::map<int, int> last_round_;  // device -> last round
};

/// Real numbers sent device -> server.
std::size_t uplink_cost(const Transcript& t);
/// Max round index + 1; 0 for an empty transcript.
int round_count(const Transcript& t);
std::size_t message_count(const Transcript& t, Direction d);
std::size_t message_count(const Transcript& t, Direction d, PayloadKind k);

nlohmann::json to_json(const Transcript& t);

struct DeviceState {
  int device_id = 0;
  data::LabeledDataset local_data;
  std::optional<nn::Network> local_model;
  std::uint64_t rng_seed = 0;
};

/// One device per entry of `shards`, seeded from `master_seed` by device id.
std::vector<DeviceState> make_devices(std::vector<data::LabeledDataset> shards, std::uint64_t master_seed);

/// Device i holds `partition.device_indices[i]` of `data`.
std::vector<DeviceState> make_devices(const data::LabeledDataset& data, const data::Partition& partition,
                                      std::uint64_t master_seed);

}  // namespace faa::proto
