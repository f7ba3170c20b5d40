// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "faa/baselines.hpp"
#include "faa/datagen.hpp"
#include "faa/fedauth.hpp"

namespace faa::eval {

/// Authentication score of `x` for claimed user `claimed_id`: the entropy of
/// the prediction when the predicted user is the claimed one, else ln K.
/// Higher means more likely unauthorized.
double auth_score(const fedauth::AuthModel& model, const Vector& x, int claimed_id);
std::vector<double> auth_scores(const fedauth::AuthModel& model, const Matrix& x, int claimed_id);

/// Scores every row of `x` against one claimed identity.
using BatchScorer = std::function<std::vector<double>(const Matrix& x, int claimed_id)>;

BatchScorer auth_scorer(const fedauth::AuthModel& model);
/// `models[i]` must be the model of enrolled user i.
BatchScorer oneclass_scorer(std::vector<baselines::OneClassModel> models, nn::Network extractor);

struct ScoreSet {
  int enrolled_user_id = 0;
  std::vector<double> genuine;
  std::vector<double> impostor;
};

struct Detection {
  double threshold = 0.0;
  double ada = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
};

/// Genuine scores below `t` are accepted, impostor scores at or above `t`
/// rejected. ADA = (TPR + TNR) / 2.
Detection ada_at_threshold(const ScoreSet& s, double t);

/// Maximizes ADA over -inf, +inf and the midpoints of consecutive distinct
/// pooled scores. Ties keep the lowest threshold.
Detection best_ada(const ScoreSet& s);

enum class ThresholdMode {
  /// Threshold tuned on the evaluated scores themselves.
  oracle,
  /// Threshold tuned on even-indexed scores, ADA reported on odd-indexed.
  validation,
};

std::string_view to_string(ThresholdMode m);
ThresholdMode threshold_mode_from_string(std::string_view s);

struct UserAda {
  int user_id = 0;
  double threshold = 0.0;
  double ada = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
};

struct AdaReport {
  std::vector<UserAda> per_user;
  double mean_ada = 0.0;
  /// Population standard deviation over users.
  double std_ada = 0.0;
  ThresholdMode mode = ThresholdMode::oracle;
};

/// Builds one ScoreSet per enrolled user (genuine: that user's test samples;
/// impostor: all samples of `unknown_ids`) and reports per-user ADA.
AdaReport evaluate_method(const BatchScorer& scorer, const data::LabeledDataset& test,
                          std::span<const int> enrolled_ids, std::span<const int> unknown_ids,
                          ThresholdMode mode = ThresholdMode::oracle);

/// Same as above from precomputed score sets.
AdaReport report_from_scores(std::span<const ScoreSet> sets, ThresholdMode mode = ThresholdMode::oracle);

nlohmann::json to_json(const AdaReport& r);
/// user_id,threshold,ada,tpr,tnr rows with a header line.
std::string per_user_csv(const AdaReport& r);

}  // namespace faa::eval
