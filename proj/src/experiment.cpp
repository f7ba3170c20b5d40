// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "faa/experiment.hpp"

#include <sstream>

#include "faa/error.hpp"

namespace faa::experiment {

std::string_view to_string(Kind k) {
  switch (k) {
    case Kind::qiid_sweep: return "qiid_sweep";
    case Kind::compare_methods: return "compare_methods";
    case Kind::unknown_ablation: return "unknown_ablation";
    case Kind::single_run: return "single_run";
  }
  return "?";
}

std::optional<Kind> kind_from_string(std::string_view s) {
  for (Kind k : {Kind::qiid_sweep, Kind::compare_methods, Kind::unknown_ablation, Kind::single_run})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

namespace {

std::vector<std::size_t> layer_dims(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

data::PopulationSpec population_spec(const ExperimentConfig& cfg) {
  auto spec = cfg.population;
  spec.seed = derive_seed(cfg.seed, "datagen");
  return spec;
}

data::PopulationSpec base_population_spec(const ExperimentConfig& cfg) {
  auto spec = cfg.base_population;
  spec.dim = cfg.population.dim;
  spec.seed = derive_seed(cfg.seed, "datagen");
  return spec;
}

Workbench prepare(const ExperimentConfig& cfg) {
  const int enrolled = cfg.eval.enrolled;
  if (enrolled < 2 || enrolled >= cfg.population.num_users)
    throw ConfigError("eval.enrolled must lie in [2, population.users)");

  Workbench wb;
  const auto population = data::gen_population(population_spec(cfg));
  auto [train_all, test] = data::split_per_class(population, cfg.eval.train_fraction);
  wb.test = std::move(test);

  std::vector<std::size_t> enrolled_rows;
  for (std::size_t r = 0; r < train_all.size(); ++r)
    if (train_all.y[r] < enrolled) enrolled_rows.push_back(r);
  wb.train = train_all.subset(enrolled_rows);
  wb.train.num_classes = enrolled;

  for (int u = 0; u < cfg.population.num_users; ++u) (u < enrolled ? wb.enrolled_ids : wb.unknown_ids).push_back(u);

  const auto base_spec = base_population_spec(cfg);
  wb.base = data::gen_base_dataset(base_spec);

  Rng init_rng(derive_seed(cfg.seed, "init"));
  const auto dims = layer_dims(static_cast<std::size_t>(cfg.population.dim), cfg.net.hidden,
                               static_cast<std::size_t>(base_spec.num_users));
  auto model = nn::Network::random(dims, init_rng);
  if (cfg.net.cut == 0 || cfg.net.cut >= model.layer_count())
    throw ConfigError("net.cut must lie in (0, " + std::to_string(model.layer_count()) + ")");
  Rng train_rng(derive_seed(cfg.seed, "base-train"));
  wb.base_model = fedauth::train_base(std::move(model), wb.base, cfg.base_training, train_rng);
  return wb;
}

nn::Network enrolled_start_model(const ExperimentConfig& cfg, const Workbench& wb) {
  nn::Network net = wb.base_model;
  Rng rng(derive_seed(cfg.seed, "head-init"));
  net.reset_head(static_cast<Eigen::Index>(wb.enrolled_ids.size()), rng);
  return net;
}

std::vector<proto::DeviceState> per_user_devices(const ExperimentConfig& cfg, const Workbench& wb) {
  std::vector<data::LabeledDataset> shards;
  for (int id : wb.enrolled_ids) shards.push_back(wb.train.subset(wb.train.rows_of(id)));
  return proto::make_devices(std::move(shards), derive_seed(cfg.seed, "devices"));
}

MethodRun run_faa(const ExperimentConfig& cfg, const Workbench& wb, fedauth::AuthModel* model_out) {
  const auto devices = per_user_devices(cfg, wb);
  auto res = fedauth::faa_train_pretrained(devices, wb.base_model, cfg.faa, cfg.net.cut, derive_seed(cfg.seed, "faa"));
  MethodRun run{"faa",
                eval::evaluate_method(eval::auth_scorer(res.model), wb.test, wb.enrolled_ids, wb.unknown_ids,
                                      cfg.eval.threshold_mode),
                std::move(res.transcript)};
  if (model_out) *model_out = std::move(res.model);
  return run;
}

MethodRun run_fedavg(const ExperimentConfig& cfg, const Workbench& wb) {
  const auto devices = per_user_devices(cfg, wb);
  auto res = baselines::fedavg_train(devices, enrolled_start_model(cfg, wb), cfg.fedavg, derive_seed(cfg.seed, "fedavg"));
  auto [extractor, classifier] = nn::split_model(res.global, cfg.net.cut);
  const fedauth::AuthModel model{extractor, classifier, static_cast<int>(wb.enrolled_ids.size())};
  return {"fedavg",
          eval::evaluate_method(eval::auth_scorer(model), wb.test, wb.enrolled_ids, wb.unknown_ids,
                                cfg.eval.threshold_mode),
          std::move(res.transcript)};
}

MethodRun run_split_learning(const ExperimentConfig& cfg, const Workbench& wb) {
  const auto devices = per_user_devices(cfg, wb);
  auto res = baselines::split_learning_train(devices, enrolled_start_model(cfg, wb), cfg.split);
  return {"split_learning",
          eval::evaluate_method(eval::auth_scorer(res.model), wb.test, wb.enrolled_ids, wb.unknown_ids,
                                cfg.eval.threshold_mode),
          std::move(res.transcript)};
}

MethodRun run_oneclass(const ExperimentConfig& cfg, const Workbench& wb) {
  const auto extractor = nn::split_model(wb.base_model, cfg.net.cut).first;
  std::vector<baselines::OneClassModel> models;
  for (int id : wb.enrolled_ids)
    models.push_back(baselines::oneclass_fit(extractor, wb.train.subset(wb.train.rows_of(id)), cfg.oneclass_reg_eps));
  return {"oneclass",
          eval::evaluate_method(eval::oneclass_scorer(std::move(models), extractor), wb.test, wb.enrolled_ids,
                                wb.unknown_ids, cfg.eval.threshold_mode),
          std::nullopt};
}

std::vector<MethodRun> compare_methods(const ExperimentConfig& cfg, const Workbench& wb) {
  std::vector<MethodRun> runs;
  runs.push_back(run_faa(cfg, wb));
  runs.push_back(run_fedavg(cfg, wb));
  runs.push_back(run_split_learning(cfg, wb));
  runs.push_back(run_oneclass(cfg, wb));
  return runs;
}

std::vector<QiidPoint> qiid_sweep(const ExperimentConfig& cfg, const Workbench& wb) {
  const auto num_devices =
      static_cast<std::size_t>(cfg.sweep.devices > 0 ? cfg.sweep.devices : static_cast<int>(wb.enrolled_ids.size()));
  const auto start = enrolled_start_model(cfg, wb);
  std::vector<QiidPoint> curve;
  for (double q : cfg.sweep.values) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("qiid_sweep.values must lie in [0, 1]");
    const auto partition = data::partition_by_qiid(wb.train, num_devices, q);
    const auto devices = proto::make_devices(wb.train, partition, derive_seed(cfg.seed, "devices"));
    auto res = baselines::fedavg_train(devices, start, cfg.fedavg, derive_seed(cfg.seed, "fedavg"));
    auto [extractor, classifier] = nn::split_model(res.global, cfg.net.cut);
    const fedauth::AuthModel model{extractor, classifier, static_cast<int>(wb.enrolled_ids.size())};
    const auto report = eval::evaluate_method(eval::auth_scorer(model), wb.test, wb.enrolled_ids, wb.unknown_ids,
                                              cfg.eval.threshold_mode);
    curve.push_back({q, partition.measured_qiid, report.mean_ada, report.std_ada});
  }
  return curve;
}

std::vector<AblationRow> unknown_count_ablation(const eval::BatchScorer& scorer, const Workbench& wb,
                                                std::span<const int> counts, eval::ThresholdMode mode) {
  std::vector<AblationRow> rows;
  for (int n : counts) {
    if (n <= 0) throw InputError("unknown user count must be positive");
    if (static_cast<std::size_t>(n) > wb.unknown_ids.size())
      throw InputError("requested " + std::to_string(n) + " unknown users, only " +
                       std::to_string(wb.unknown_ids.size()) + " available");
    const std::span<const int> unknown(wb.unknown_ids.data(), static_cast<std::size_t>(n));
    const auto report = eval::evaluate_method(scorer, wb.test, wb.enrolled_ids, unknown, mode);
    rows.push_back({n, report.mean_ada, report.std_ada});
  }
  return rows;
}

std::vector<AblationRow> unknown_count_ablation(const ExperimentConfig& cfg, const Workbench& wb) {
  const auto devices = per_user_devices(cfg, wb);
  const auto res =
      fedauth::faa_train_pretrained(devices, wb.base_model, cfg.faa, cfg.net.cut, derive_seed(cfg.seed, "faa"));
  return unknown_count_ablation(eval::auth_scorer(res.model), wb, cfg.ablation.unknown_counts,
                                cfg.eval.threshold_mode);
}

std::string curve_csv(const std::vector<QiidPoint>& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "target_qiid,measured_qiid,mean_ada,std_ada\n";
  for (const auto& p : curve) out << p.target_qiid << ',' << p.measured_qiid << ',' << p.mean_ada << ',' << p.std_ada << '\n';
  return out.str();
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "num_unknown,mean_ada,std_ada\n";
  for (const auto& r : rows) out << r.num_unknown << ',' << r.mean_ada << ',' << r.std_ada << '\n';
  return out.str();
}

}  // namespace faa::experiment
