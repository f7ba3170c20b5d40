// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "faa/protocol.hpp"

#include <algorithm>

#include "faa/error.hpp"

namespace faa::proto {

std::string_view to_string(Direction d) {
  return d == Direction::device_to_server ? "device_to_server" : "server_to_device";
}

std::string_view to_string(PayloadKind k) {
  switch (k) {
    case PayloadKind::model_params: return "ModelParams";
    case PayloadKind::impression: return "ImpressionPayload";
    case PayloadKind::activation_batch: return "ActivationBatch";
    case PayloadKind::gradient_batch: return "GradientBatch";
    case PayloadKind::scalar: return "Scalar";
  }
  return "?";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::faa: return "faa";
    case Method::fedavg: return "fedavg";
    case Method::split_learning: return "split_learning";
  }
  return "?";
}

ModelParams ModelParams::of(const nn::Network& net) { return ModelParams(net.flatten_parameters()); }

void ModelParams::load_into(nn::Network& net) const { net.assign_parameters(values_); }

ImpressionPayload ImpressionPayload::of(const UserImpression& imp) {
  imp.validate();
  return ImpressionPayload(imp);
}

std::size_t ImpressionPayload::size_units() const {
  const auto d = static_cast<std::size_t>(imp_.dim());
  return d + (imp_.diagonal ? d : d * d) + 1;
}

ActivationBatch ActivationBatch::compute(const nn::Network& device_part, const Matrix& x,
                                         std::span<const int> labels, nn::ForwardCache& cache) {
  if (device_part.empty()) throw ConfigError("device-side network must hold at least one layer");
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ShapeError("sample/label count mismatch");
  Matrix a = nn::forward(device_part, x, &cache);
  return ActivationBatch(std::move(a), std::vector<int>(labels.begin(), labels.end()));
}

PayloadKind kind_of(const Payload& p) {
  return std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ModelParams>) return PayloadKind::model_params;
        else if constexpr (std::is_same_v<T, ImpressionPayload>) return PayloadKind::impression;
        else if constexpr (std::is_same_v<T, ActivationBatch>) return PayloadKind::activation_batch;
        else if constexpr (std::is_same_v<T, GradientBatch>) return PayloadKind::gradient_batch;
        else return PayloadKind::scalar;
      },
      p);
}

std::size_t size_units(const Payload& p) {
  return std::visit([](const auto& v) { return v.size_units(); }, p);
}

bool allowed(Direction d, PayloadKind k) {
  switch (k) {
    case PayloadKind::model_params:
    case PayloadKind::scalar: return true;
    case PayloadKind::impression:
    case PayloadKind::activation_batch: return d == Direction::device_to_server;
    case PayloadKind::gradient_batch: return d == Direction::server_to_device;
  }
  return false;
}

void Transcript::record(Direction direction, int device_id, int round, const Payload& payload) {
  const PayloadKind kind = kind_of(payload);
  if (!allowed(direction, kind))
    throw InputError(std::string(to_string(kind)) + " may not travel " + std::string(to_string(direction)));
  if (round < 0) throw InputError("negative round index");
  auto [it, inserted] = last_round_.try_emplace(device_id, round);
  if (!inserted) {
    if (round < it->second)
      throw InputError("round " + std::to_string(round) + " precedes round " + std::to_string(it->second) +
                       " already logged for device " + std::to_string(device_id));
    it->second = round;
  }
  messages_.push_back({direction, device_id, round, kind, size_units(payload)});
}

std::size_t uplink_cost(const Transcript& t) {
  std::size_t total = 0;
  for (const auto& m : t.messages())
    if (m.direction == Direction::device_to_server) total += m.size_units;
  return total;
}

int round_count(const Transcript& t) {
  int max_round = -1;
  for (const auto& m : t.messages()) max_round = std::max(max_round, m.round);
  return max_round + 1;
}

std::size_t message_count(const Transcript& t, Direction d) {
  return static_cast<std::size_t>(
      std::count_if(t.messages().begin(), t.messages().end(), [&](const Message& m) { return m.direction == d; }));
}

std::size_t message_count(const Transcript& t, Direction d, PayloadKind k) {
  return static_cast<std::size_t>(std::count_if(t.messages().begin(), t.messages().end(), [&](const Message& m) {
    return m.direction == d && m.kind == k;
  }));
}

nlohmann::json to_json(const Transcript& t) {
  nlohmann::json msgs = nlohmann::json::array();
  std::size_t down_units = 0;
  for (const auto& m : t.messages()) {
    msgs.push_back({{"direction", to_string(m.direction)},
                    {"device_id", m.device_id},
                    {"round", m.round},
                    {"kind", to_string(m.kind)},
                    {"size_units", m.size_units}});
    if (m.direction == Direction::server_to_device) down_units += m.size_units;
  }
  return {{"method_tag", to_string(t.method())},
          {"messages", std::move(msgs)},
          {"totals",
           {{"messages", t.messages().size()},
            {"uplink_messages", message_count(t, Direction::device_to_server)},
            {"downlink_messages", message_count(t, Direction::server_to_device)},
            {"uplink_units", uplink_cost(t)},
            {"downlink_units", down_units},
            {"rounds", round_count(t)}}}};
}

std::vector<DeviceState> make_devices(std::vector<data::LabeledDataset> shards, std::uint64_t master_seed) {
  std::vector<DeviceState> devices;
  devices.reserve(shards.size());
  for (std::size_t i = 0; i < shards.size(); ++i) {
    DeviceState d;
    d.device_id = static_cast<int>(i);
    d.local_data = std::move(shards[i]);
    d.rng_seed = derive_seed(derive_seed(master_seed, "device"), i);
    devices.push_back(std::move(d));
  }
  return devices;
}

std::vector<DeviceState> make_devices(const data::LabeledDataset& data, const data::Partition& partition,
                                      std::uint64_t master_seed) {
  std::vector<data::LabeledDataset> shards;
  for (const auto& idx : partition.device_indices) shards.push_back(data.subset(idx));
  return make_devices(std::move(shards), master_seed);
}

}  // namespace faa::proto
