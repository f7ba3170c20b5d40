// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "faa/baselines.hpp"
#include "faa/datagen.hpp"
#include "faa/eval.hpp"
#include "faa/fedauth.hpp"
#include "faa/nn.hpp"
#include "faa/protocol.hpp"

namespace faa::experiment {

enum class Kind { qiid_sweep, compare_methods, unknown_ablation, single_run };

std::string_view to_string(Kind k);
std::optional<Kind> kind_from_string(std::string_view s);

struct NetConfig {
  std::vector<std::size_t> hidden{64, 32};
  /// Layers [0, cut) form the feature extractor.
  std::size_t cut = 2;
};

struct EvalConfig {
  int enrolled = 10;
  double train_fraction = 0.5;
  eval::ThresholdMode threshold_mode = eval::ThresholdMode::oracle;
};

struct SweepConfig {
  std::vector<double> values{1.0, 0.75, 0.5, 0.25, 0.0};
  /// 0 means one device per enrolled user.
  int devices = 0;
};

struct AblationConfig {
  std::vector<int> unknown_counts{4, 6, 8, 10};
};

struct ExperimentConfig {
  Kind kind = Kind::compare_methods;
  /// Enrolled and unknown users together; ids >= eval.enrolled are unknown.
  data::PopulationSpec population{20, 16, 120, 4.0, 1.0, 0};
  data::PopulationSpec base_population{20, 16, 100, 4.0, 1.0, 0};
  NetConfig net;
  nn::TrainConfig base_training;
  fedauth::FaaConfig faa;
  baselines::FedAvgConfig fedavg;
  baselines::SplitConfig split;
  double oneclass_reg_eps = 1e-6;
  EvalConfig eval;
  SweepConfig sweep;
  AblationConfig ablation;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "results";
};

/// Data and the trained base model shared by every method of one experiment.
struct Workbench {
  data::LabeledDataset train;  // enrolled users only, labels 0..E-1
  data::LabeledDataset test;   // every user
  data::LabeledDataset base;
  nn::Network base_model;      // trained on `base`
  std::vector<int> enrolled_ids;
  std::vector<int> unknown_ids;
};

/// Population and base specs with their seeds filled from the master seed.
data::PopulationSpec population_spec(const ExperimentConfig& cfg);
data::PopulationSpec base_population_spec(const ExperimentConfig& cfg);

Workbench prepare(const ExperimentConfig& cfg);

/// The base model with its head re-dimensioned to the enrolled user count;
/// the common starting point of FedAvg and split learning.
nn::Network enrolled_start_model(const ExperimentConfig& cfg, const Workbench& wb);

/// One device per enrolled user (qIID = 0).
std::vector<proto::DeviceState> per_user_devices(const ExperimentConfig& cfg, const Workbench& wb);

struct MethodRun {
  std::string name;
  eval::AdaReport report;
  std::optional<proto::Transcript> transcript;
};

MethodRun run_faa(const ExperimentConfig& cfg, const Workbench& wb, fedauth::AuthModel* model_out = nullptr);
MethodRun run_fedavg(const ExperimentConfig& cfg, const Workbench& wb);
MethodRun run_split_learning(const ExperimentConfig& cfg, const Workbench& wb);
MethodRun run_oneclass(const ExperimentConfig& cfg, const Workbench& wb);

/// faa, fedavg, split_learning, oneclass in that order.
std::vector<MethodRun> compare_methods(const ExperimentConfig& cfg, const Workbench& wb);

struct QiidPoint {
  double target_qiid = 0.0;
  double measured_qiid = 0.0;
  double mean_ada = 0.0;
  double std_ada = 0.0;
};

/// FedAvg mean ADA for every value of cfg.sweep.values.
std::vector<QiidPoint> qiid_sweep(const ExperimentConfig& cfg, const Workbench& wb);

struct AblationRow {
  int num_unknown = 0;
  double mean_ada = 0.0;
  double std_ada = 0.0;
};

/// FAA evaluated against the first n unknown users for each requested n.
std::vector<AblationRow> unknown_count_ablation(const ExperimentConfig& cfg, const Workbench& wb);
std::vector<AblationRow> unknown_count_ablation(const eval::BatchScorer& scorer, const Workbench& wb,
                                                std::span<const int> counts, eval::ThresholdMode mode);

std::string curve_csv(const std::vector<QiidPoint>& curve);
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace faa::experiment
