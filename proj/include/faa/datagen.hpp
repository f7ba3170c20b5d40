// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "faa/nn.hpp"

namespace faa::data {

/// Samples are rows of `x`; `y[r]` is the class of row r.
struct LabeledDataset {
  Matrix x;
  std::vector<int> y;
  int num_classes = 0;

  std::size_t size() const { return y.size(); }
  Eigen::Index dim() const { return x.cols(); }
  bool empty() const { return y.empty(); }

  /// Throws InputError on label range, arity or finiteness violations.
  void validate() const;

  LabeledDataset subset(std::span<const std::size_t> rows) const;
  /// Rows whose label is `label`, in original order.
  std::vector<std::size_t> rows_of(int label) const;

  bool operator==(const LabeledDataset&) const = default;
};

struct PopulationSpec {
  int num_users = 10;
  int dim = 16;
  int samples_per_user = 100;
  double separation = 10.0;
  double within_scale = 1.0;
  std::uint64_t seed = 0;
};

/// Per-user centroids on a sphere of radius `separation`; samples from an
/// axis-aligned Gaussian whose per-axis std is `within_scale * U[0.5, 1.5]`.
/// Output is user-major: rows [k*n, (k+1)*n) belong to user k.
LabeledDataset gen_population(const PopulationSpec& spec);

/// Same generator on a disjoint seed stream, so base classes never coincide
/// with any enrolled or unknown user.
LabeledDataset gen_base_dataset(const PopulationSpec& spec);

/// Seed used by gen_base_dataset for a given spec seed.
std::uint64_t base_seed(std::uint64_t seed);

/// The user centroids gen_population draws for `spec`.
Matrix population_centroids(const PopulationSpec& spec);

/// Minimum samples of one user a device must hold for that user to count.
inline constexpr std::size_t kSufficientSamples = 5;

struct Partition {
  std::vector<std::vector<std::size_t>> device_indices;
  std::vector<int> users_per_device;
  double measured_qiid = 0.0;

  std::size_t num_devices() const { return device_indices.size(); }
};

/// Users on one device holding at least `threshold` samples.
int count_users(const LabeledDataset& data, std::span<const std::size_t> rows,
                std::size_t threshold = kSufficientSamples);

/// ((1/N) sum K_i/K - 1/K) / (1 - 1/K), clamped to [0, 1].
double compute_qiid(std::span<const int> users_per_device, int num_classes);
inline double compute_qiid(const Partition& p, int num_classes) {
  return compute_qiid(p.users_per_device, num_classes);
}

/// Each device holds round(target * (K - 1) + 1) users, assigned round-robin;
/// every device gets the same number of samples, split evenly across its
/// users. Without `samples_per_device` the largest feasible equal quota is
/// used.
Partition partition_by_qiid(const LabeledDataset& data, std::size_t num_devices, double target_qiid,
                            std::optional<std::size_t> samples_per_device = std::nullopt);

/// Splits every class's rows in original order: the first
/// floor(fraction * n_k) go to the first set.
std::pair<LabeledDataset, LabeledDataset> split_per_class(const LabeledDataset& data, double fraction);

void save_features(const LabeledDataset& data, const std::filesystem::path& path);
LabeledDataset load_features(const std::filesystem::path& path);

}  // namespace faa::data
