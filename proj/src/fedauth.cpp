// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "faa/fedauth.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "faa/error.hpp"
#include "faa/parallel.hpp"

namespace faa {

void UserImpression::validate() const {
  if (n < 1) throw InputError("impression of user " + std::to_string(user_id) + " has no samples");
  if (sigma.rows() != mu.size() || sigma.cols() != mu.size())
    throw InputError("impression covariance is not " + std::to_string(mu.size()) + "x" +
                     std::to_string(mu.size()));
  if (!mu.allFinite() || !sigma.allFinite()) throw InputError("impression holds non-finite values");
  if (mu.size() > 0 && (sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw InputError("impression covariance is not symmetric");
}

}  // namespace faa

namespace faa::fedauth {

using proto::Direction;

void FaaConfig::validate() const {
  if (samples_per_user <= 0) throw ConfigError("faa.M must be > 0");
  if (epochs < 0) throw ConfigError("faa.epochs must be >= 0");
  if (batch_size <= 0) throw ConfigError("faa.batch_size must be > 0");
  if (!(learning_rate > 0.0)) throw ConfigError("faa.learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("faa.momentum must lie in [0, 1)");
  if (!(cov_reg_eps > 0.0)) throw ConfigError("faa.cov_reg_eps must be > 0");
}

void AuthModel::validate() const {
  if (extractor.empty() || classifier.empty()) throw ShapeError("auth model needs both networks");
  if (classifier.input_dim() != extractor.output_dim())
    throw ShapeError("classifier input " + std::to_string(classifier.input_dim()) + " != extractor output " +
                     std::to_string(extractor.output_dim()));
  if (classifier.output_dim() != num_users)
    throw ShapeError("classifier emits " + std::to_string(classifier.output_dim()) + " logits for " +
                     std::to_string(num_users) + " users");
}

Matrix AuthModel::logits(const Matrix& x) const { return nn::forward(classifier, nn::forward(extractor, x)); }

// Serialization: {"format": "faa-auth-model", "version": 1, "num_users": K,
// "extractor": net, "classifier": net}, where a net is a list of layers with
// dims, activation and row-major weights.

nlohmann::json to_json(const nn::Network& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    layers.push_back({{"in", l.in_dim()},
                      {"out", l.out_dim()},
                      {"activation", l.activation == nn::Activation::relu ? "relu" : "identity"},
                      {"weights", std::vector<double>(l.weights.data(), l.weights.data() + l.weights.size())},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  return {{"layers", std::move(layers)}};
}

nn::Network network_from_json(const nlohmann::json& j) {
  std::vector<nn::DenseLayer> layers;
  for (const auto& jl : j.at("layers")) {
    const auto in = jl.at("in").get<Eigen::Index>();
    const auto out = jl.at("out").get<Eigen::Index>();
    const auto w = jl.at("weights").get<std::vector<double>>();
    const auto b = jl.at("bias").get<std::vector<double>>();
    const auto act = jl.at("activation").get<std::string>();
    if (in <= 0 || out <= 0 || w.size() != static_cast<std::size_t>(in * out) ||
        b.size() != static_cast<std::size_t>(out))
      throw ShapeError("serialized layer dims do not match its values");
    if (act != "relu" && act != "identity") throw InputError("unknown activation '" + act + "'");
    nn::DenseLayer l;
    l.weights = Eigen::Map<const Matrix>(w.data(), out, in);
    l.bias = Eigen::Map<const Vector>(b.data(), out);
    l.activation = act == "relu" ? nn::Activation::relu : nn::Activation::identity;
    layers.push_back(std::move(l));
  }
  return nn::Network(std::move(layers));
}

nlohmann::json to_json(const AuthModel& model) {
  return {{"format", "faa-auth-model"},
          {"version", 1},
          {"num_users", model.num_users},
          {"extractor", to_json(model.extractor)},
          {"classifier", to_json(model.classifier)}};
}

AuthModel auth_model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "faa-auth-model") throw InputError("not an auth model document");
  if (j.value("version", 0) != 1) throw InputError("unsupported auth model version");
  AuthModel m;
  m.num_users = j.at("num_users").get<int>();
  m.extractor = network_from_json(j.at("extractor"));
  m.classifier = network_from_json(j.at("classifier"));
  m.validate();
  return m;
}

void save_auth_model(const AuthModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << to_json(model).dump() << '\n';
}

AuthModel load_auth_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return auth_model_from_json(nlohmann::json::parse(in));
}

nn::Network train_base(nn::Network net, const data::LabeledDataset& base, const nn::TrainConfig& cfg, Rng& rng) {
  if (net.output_dim() != base.num_classes)
    throw ConfigError("base network emits " + std::to_string(net.output_dim()) + " logits for " +
                      std::to_string(base.num_classes) + " base classes");
  nn::train_sgd(net, base.x, base.y, cfg, rng);
  return net;
}

UserImpression impression_from_features(const Matrix& features, int user_id, bool diagonal) {
  if (features.rows() == 0) throw InputError("cannot estimate an impression from zero samples");
  UserImpression imp;
  imp.user_id = user_id;
  imp.n = static_cast<std::size_t>(features.rows());
  imp.diagonal = diagonal;
  const double inv_n = 1.0 / static_cast<double>(features.rows());
  imp.mu = features.colwise().sum().transpose() * inv_n;
  const Matrix centered = features.rowwise() - imp.mu.transpose();
  if (diagonal) {
    imp.sigma = (centered.array().square().colwise().sum() * inv_n).matrix().asDiagonal();
  } else {
    imp.sigma = centered.transpose() * centered * inv_n;
    imp.sigma = 0.5 * (imp.sigma + imp.sigma.transpose());
  }
  return imp;
}

UserImpression estimate_impression(const nn::Network& extractor, const data::LabeledDataset& device_data,
                                   bool diagonal) {
  if (device_data.empty()) throw InputError("device holds no samples");
  const int user = device_data.y.front();
  if (std::any_of(device_data.y.begin(), device_data.y.end(), [&](int y) { return y != user; }))
    throw InputError("device data mixes several users");
  return impression_from_features(nn::forward(extractor, device_data.x), user, diagonal);
}

CholeskyFactor chol_psd(const Matrix& sigma, double eps) {
  if (sigma.rows() != sigma.cols()) throw ShapeError("covariance must be square");
  if (sigma.rows() == 0) return {Matrix(0, 0), 0.0};
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw InputError("covariance is not symmetric");
  const auto d = static_cast<double>(sigma.rows());
  double jitter = eps * std::max(sigma.trace() / d, 1.0);
  for (int attempt = 0; attempt < 4; ++attempt, jitter *= 10.0) {
    Matrix reg = sigma;
    reg.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(reg);
    if (llt.info() == Eigen::Success) return {Matrix(llt.matrixL()), jitter};
  }
  throw NumericError("Cholesky factorization failed after 3 regularization retries");
}

SampledFeatures sample_user_features(const UserImpression& imp, std::size_t count, Rng& rng, double eps) {
  imp.validate();
  SampledFeatures out;
  const Eigen::Index d = imp.dim();
  out.features.resize(static_cast<Eigen::Index>(count), d);
  out.labels.assign(count, imp.user_id);
  if (count == 0) return out;
  const Matrix lower = chol_psd(imp.sigma, eps).lower;
  Vector z(d);
  for (std::size_t i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z[j] = rng.normal();
    out.features.row(static_cast<Eigen::Index>(i)) = (imp.mu + lower * z).transpose();
  }
  return out;
}

void check_impression_cover(std::span<const UserImpression> impressions) {
  std::set<int> seen;
  for (const auto& imp : impressions) {
    if (imp.user_id < 0 || imp.user_id >= static_cast<int>(impressions.size()))
      throw InputError("impression user id " + std::to_string(imp.user_id) + " outside [0, " +
                       std::to_string(impressions.size()) + ")");
    if (!seen.insert(imp.user_id).second)
      throw InputError("duplicate impression for user " + std::to_string(imp.user_id));
  }
  if (impressions.empty()) throw InputError("no impressions");
}

data::LabeledDataset build_server_dataset(std::span<const UserImpression> impressions, const FaaConfig& cfg,
                                          std::uint64_t seed) {
  cfg.validate();
  check_impression_cover(impressions);
  std::vector<const UserImpression*> by_id(impressions.size());
  for (const auto& imp : impressions) by_id[static_cast<std::size_t>(imp.user_id)] = &imp;

  const auto m = static_cast<std::size_t>(cfg.samples_per_user);
  const Eigen::Index d = impressions.front().dim();
  data::LabeledDataset out;
  out.num_classes = static_cast<int>(impressions.size());
  out.x.resize(static_cast<Eigen::Index>(impressions.size() * m), d);
  out.y.reserve(impressions.size() * m);
  for (std::size_t k = 0; k < by_id.size(); ++k) {
    if (by_id[k]->dim() != d) throw ShapeError("impressions disagree on feature dimension");
    Rng rng(derive_seed(seed, k));
    auto s = sample_user_features(*by_id[k], m, rng, cfg.cov_reg_eps);
    out.x.middleRows(static_cast<Eigen::Index>(k * m), static_cast<Eigen::Index>(m)) = s.features;
    out.y.insert(out.y.end(), s.labels.begin(), s.labels.end());
  }
  return out;
}

nn::Network train_server_classifier(nn::Network classifier, std::span<const UserImpression> impressions,
                                    const FaaConfig& cfg, std::uint64_t seed) {
  if (classifier.output_dim() != static_cast<Eigen::Index>(impressions.size()))
    throw ConfigError("classifier emits " + std::to_string(classifier.output_dim()) + " logits for " +
                      std::to_string(impressions.size()) + " users");
  const auto server_data = build_server_dataset(impressions, cfg, derive_seed(seed, "faa-sampling"));
  Rng shuffle_rng(derive_seed(seed, "faa-train"));
  nn::train_sgd(classifier, server_data.x, server_data.y, cfg.train_config(), shuffle_rng);
  return classifier;
}

FaaResult faa_train_pretrained(std::span<const proto::DeviceState> devices, const nn::Network& base_model,
                               const FaaConfig& cfg, std::size_t cut, std::uint64_t seed) {
  cfg.validate();
  if (devices.empty()) throw ConfigError("FAA needs at least one device");
  auto parts = nn::split_model(base_model, cut);
  nn::Network extractor = std::move(parts.first);
  nn::Network classifier = std::move(parts.second);
  const auto k = static_cast<Eigen::Index>(devices.size());
  Rng init_rng(derive_seed(seed, "init"));
  classifier.reset_head(k, init_rng);

  FaaResult result;
  auto& transcript = result.transcript;

  // Round 0: F goes down, one impression per device comes back.
  const auto f_params = proto::ModelParams::of(extractor);
  for (const auto& dev : devices) transcript.record(Direction::server_to_device, dev.device_id, 0, f_params);

  std::vector<std::optional<proto::ImpressionPayload>> uplinks(devices.size());
  parallel_for(devices.size(), [&](std::size_t i) {
    // The device rebuilds F from the broadcast parameters.
    nn::Network local_f = extractor;
    f_params.load_into(local_f);
    uplinks[i] = proto::ImpressionPayload::of(
        estimate_impression(local_f, devices[i].local_data, cfg.diagonal_covariance));
  });

  std::vector<UserImpression> impressions;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    transcript.record(Direction::device_to_server, devices[i].device_id, 0, *uplinks[i]);
    impressions.push_back(uplinks[i]->impression());
  }

  // Step 3 happens entirely on the server.
  classifier = train_server_classifier(std::move(classifier), impressions, cfg, seed);

  // Round 1: the trained classifier goes down.
  const auto c_params = proto::ModelParams::of(classifier);
  for (const auto& dev : devices) transcript.record(Direction::server_to_device, dev.device_id, 1, c_params);

  result.model = AuthModel{std::move(extractor), std::move(classifier), static_cast<int>(k)};
  result.model.validate();
  return result;
}

FaaResult faa_train(std::span<const proto::DeviceState> devices, const data::LabeledDataset& base_data,
                    nn::Network model, const nn::TrainConfig& base_cfg, const FaaConfig& cfg, std::size_t cut,
                    std::uint64_t seed) {
  Rng base_rng(derive_seed(seed, "base-train"));
  const auto trained = train_base(std::move(model), base_data, base_cfg, base_rng);
  return faa_train_pretrained(devices, trained, cfg, cut, seed);
}

}  // namespace faa::fedauth
