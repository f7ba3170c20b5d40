// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "faa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "faa/error.hpp"
#include "faa/parallel.hpp"

namespace faa::eval {

namespace {

double score_from_logits(const Eigen::Ref<const Vector>& logits, int claimed_id) {
  const auto k = logits.size();
  if (claimed_id < 0 || claimed_id >= k)
    throw InputError("claimed id " + std::to_string(claimed_id) + " outside [0, " + std::to_string(k) + ")");
  const Vector p = nn::softmax(logits);
  if (nn::argmax(p) == claimed_id) return nn::entropy(p);
  return std::log(static_cast<double>(k));
}

}  // namespace

double auth_score(const fedauth::AuthModel& model, const Vector& x, int claimed_id) {
  const Matrix logits = model.logits(Matrix(x.transpose()));
  return score_from_logits(logits.row(0).transpose(), claimed_id);
}

std::vector<double> auth_scores(const fedauth::AuthModel& model, const Matrix& x, int claimed_id) {
  if (claimed_id < 0 || claimed_id >= model.num_users)
    throw InputError("claimed id " + std::to_string(claimed_id) + " outside [0, " +
                     std::to_string(model.num_users) + ")");
  const Matrix logits = model.logits(x);
  std::vector<double> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r)
    out[static_cast<std::size_t>(r)] = score_from_logits(logits.row(r).transpose(), claimed_id);
  return out;
}

BatchScorer auth_scorer(const fedauth::AuthModel& model) {
  return [model](const Matrix& x, int claimed_id) { return auth_scores(model, x, claimed_id); };
}

BatchScorer oneclass_scorer(std::vector<baselines::OneClassModel> models, nn::Network extractor) {
  return [models = std::move(models), extractor = std::move(extractor)](const Matrix& x, int claimed_id) {
    if (claimed_id < 0 || static_cast<std::size_t>(claimed_id) >= models.size())
      throw InputError("no one-class model for user " + std::to_string(claimed_id));
    return baselines::oneclass_scores(models[static_cast<std::size_t>(claimed_id)], extractor, x);
  };
}

Detection ada_at_threshold(const ScoreSet& s, double t) {
  if (s.genuine.empty() || s.impostor.empty()) throw InputError("score sets must be non-empty");
  const auto accepted =
      std::count_if(s.genuine.begin(), s.genuine.end(), [&](double v) { return v < t; });
  const auto rejected =
      std::count_if(s.impostor.begin(), s.impostor.end(), [&](double v) { return v >= t; });
  Detection d;
  d.threshold = t;
  d.tpr = static_cast<double>(accepted) / static_cast<double>(s.genuine.size());
  d.tnr = static_cast<double>(rejected) / static_cast<double>(s.impostor.size());
  d.ada = 0.5 * (d.tpr + d.tnr);
  return d;
}

Detection best_ada(const ScoreSet& s) {
  if (s.genuine.empty() || s.impostor.empty()) throw InputError("score sets must be non-empty");
  std::vector<double> gen = s.genuine;
  std::vector<double> imp = s.impostor;
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());
  std::vector<double> pooled = gen;
  pooled.insert(pooled.end(), imp.begin(), imp.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  std::vector<double> candidates;
  candidates.reserve(pooled.size() + 1);
  candidates.push_back(-std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i + 1 < pooled.size(); ++i) candidates.push_back(0.5 * (pooled[i] + pooled[i + 1]));
  candidates.push_back(std::numeric_limits<double>::infinity());

  const auto ng = static_cast<double>(gen.size());
  const auto ni = static_cast<double>(imp.size());
  Detection best;
  best.ada = -1.0;
  for (double t : candidates) {
    const auto accepted = std::lower_bound(gen.begin(), gen.end(), t) - gen.begin();
    const auto below = std::lower_bound(imp.begin(), imp.end(), t) - imp.begin();
    const double tpr = static_cast<double>(accepted) / ng;
    const double tnr = (ni - static_cast<double>(below)) / ni;
    const double ada = 0.5 * (tpr + tnr);
    if (ada > best.ada) best = {t, ada, tpr, tnr};
  }
  return best;
}

std::string_view to_string(ThresholdMode m) { return m == ThresholdMode::oracle ? "oracle" : "validation"; }

ThresholdMode threshold_mode_from_string(std::string_view s) {
  if (s == "oracle") return ThresholdMode::oracle;
  if (s == "validation") return ThresholdMode::validation;
  throw InputError("unknown threshold mode '" + std::string(s) + "'");
}

namespace {

void split_alternating(const std::vector<double>& v, std::vector<double>& even, std::vector<double>& odd) {
  for (std::size_t i = 0; i < v.size(); ++i) (i % 2 == 0 ? even : odd).push_back(v[i]);
}

UserAda evaluate_set(const ScoreSet& s, ThresholdMode mode) {
  Detection d;
  if (mode == ThresholdMode::oracle) {
    d = best_ada(s);
  } else {
    ScoreSet tune{s.enrolled_user_id, {}, {}};
    ScoreSet held{s.enrolled_user_id, {}, {}};
    split_alternating(s.genuine, tune.genuine, held.genuine);
    split_alternating(s.impostor, tune.impostor, held.impostor);
    if (held.genuine.empty() || held.impostor.empty())
      throw InputError("validation mode needs at least two genuine and two impostor scores");
    d = ada_at_threshold(held, best_ada(tune).threshold);
  }
  return {s.enrolled_user_id, d.threshold, d.ada, d.tpr, d.tnr};
}

}  // namespace

AdaReport report_from_scores(std::span<const ScoreSet> sets, ThresholdMode mode) {
  if (sets.empty()) throw InputError("no score sets to report");
  AdaReport r;
  r.mode = mode;
  for (const auto& s : sets) r.per_user.push_back(evaluate_set(s, mode));
  double sum = 0.0;
  for (const auto& u : r.per_user) sum += u.ada;
  r.mean_ada = sum / static_cast<double>(r.per_user.size());
  double var = 0.0;
  for (const auto& u : r.per_user) var += (u.ada - r.mean_ada) * (u.ada - r.mean_ada);
  r.std_ada = std::sqrt(var / static_cast<double>(r.per_user.size()));
  return r;
}

AdaReport evaluate_method(const BatchScorer& scorer, const data::LabeledDataset& test,
                          std::span<const int> enrolled_ids, std::span<const int> unknown_ids, ThresholdMode mode) {
  const std::set<int> enrolled(enrolled_ids.begin(), enrolled_ids.end());
  for (int u : unknown_ids)
    if (enrolled.count(u)) throw InputError("user " + std::to_string(u) + " is both enrolled and unknown");
  if (enrolled_ids.empty() || unknown_ids.empty()) throw InputError("need enrolled and unknown users");

  std::vector<std::size_t> impostor_rows;
  for (int u : unknown_ids) {
    const auto rows = test.rows_of(u);
    impostor_rows.insert(impostor_rows.end(), rows.begin(), rows.end());
  }
  const Matrix impostor_x = test.subset(impostor_rows).x;

  std::vector<ScoreSet> sets(enrolled_ids.size());
  parallel_for(enrolled_ids.size(), [&](std::size_t i) {
    const int id = enrolled_ids[i];
    const auto rows = test.rows_of(id);
    sets[i].enrolled_user_id = id;
    sets[i].genuine = scorer(test.subset(rows).x, id);
    sets[i].impostor = scorer(impostor_x, id);
  });
  return report_from_scores(sets, mode);
}

nlohmann::json to_json(const AdaReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& u : r.per_user)
    rows.push_back({{"user_id", u.user_id}, {"threshold", u.threshold}, {"ada", u.ada}, {"tpr", u.tpr}, {"tnr", u.tnr}});
  return {{"threshold_mode", to_string(r.mode)}, {"mean_ada", r.mean_ada}, {"std_ada", r.std_ada}, {"per_user", rows}};
}

std::string per_user_csv(const AdaReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "user_id,threshold,ada,tpr,tnr\n";
  for (const auto& u : r.per_user)
    out << u.user_id << ',' << u.threshold << ',' << u.ada << ',' << u.tpr << ',' << u.tnr << '\n';
  return out.str();
}

}  // namespace faa::eval
