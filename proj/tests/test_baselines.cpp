// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "faa/baselines.hpp"
#include "faa/error.hpp"
#include "test_util.hpp"

using namespace faa;
using faa::testing::random_matrix;
using proto::Direction;
using proto::PayloadKind;

namespace {

data::LabeledDataset blobs(int classes, int per_class, double gap, Rng& rng, int label_offset = 0) {
  data::LabeledDataset d{Matrix(classes * per_class, 3), {}, classes + label_offset};
  for (int i = 0; i < classes * per_class; ++i) {
    const int k = i % classes;
    d.x.row(i) = 0.3 * random_matrix(1, 3, rng);
    d.x(i, k % 3) += gap * (k < 3 ? 1.0 : -1.0);
    d.y.push_back(k + label_offset);
  }
  return d;
}

// One single-user shard per class, the regime where every device sees one label.
std::vector<proto::DeviceState> one_user_devices(int k, int per_class, Rng& rng) {
  std::vector<data::LabeledDataset> shards;
  for (int u = 0; u < k; ++u) {
    auto d = blobs(1, per_class, 3.0, rng, u);
    d.x.col(u % 3).array() += 2.0 * u;
    d.num_classes = k;
    shards.push_back(d);
  }
  return proto::make_devices(shards, 5);
}

}  // namespace

TEST_CASE("weighted_average: hand examples") {
  const std::vector<std::vector<double>> p{{1.0}, {3.0}};
  CHECK(baselines::weighted_average(p, std::vector<double>{1, 1})[0] == 2.0);
  CHECK(baselines::weighted_average(p, std::vector<double>{1, 3})[0] == 2.5);
  const std::vector<std::vector<double>> same(4, std::vector<double>{0.1, -7.25, 1e-9});
  CHECK(baselines::weighted_average(same, std::vector<double>{1, 2, 3, 4}) == same[0]);
  CHECK_THROWS_AS(baselines::weighted_average(p, std::vector<double>{1}), InputError);
  CHECK_THROWS_AS(baselines::weighted_average(p, std::vector<double>{0, 0}), InputError);
}

TEST_CASE("weighted_average: each coordinate stays within the returned range") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(6), dim = 1 + rng.below(5);
    std::vector<std::vector<double>> p(n, std::vector<double>(dim));
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : p[i]) v = 10 * rng.normal();
      w[i] = 1.0 + static_cast<double>(rng.below(100));
    }
    const auto avg = baselines::weighted_average(p, w);
    for (std::size_t c = 0; c < dim; ++c) {
      double lo = INFINITY, hi = -INFINITY;
      for (const auto& v : p) lo = std::min(lo, v[c]), hi = std::max(hi, v[c]);
      CHECK(avg[c] >= lo - 1e-12);
      CHECK(avg[c] <= hi + 1e-12);
    }
  }
}

TEST_CASE("fedavg: zero local epochs leave the global model bit-exact") {
  Rng rng(2);
  const auto devices = one_user_devices(4, 20, rng);
  const std::vector<std::size_t> dims{3, 8, 4};
  const auto init = nn::Network::random(dims, rng);
  baselines::FedAvgConfig cfg;
  cfg.rounds = 3;
  cfg.local_epochs = 0;
  CHECK(baselines::fedavg_train(devices, init, cfg, 1).global == init);
}

TEST_CASE("fedavg: transcript counts and determinism") {
  Rng rng(3);
  const auto devices = one_user_devices(5, 16, rng);
  const std::vector<std::size_t> dims{3, 8, 5};
  const auto init = nn::Network::random(dims, rng);
  baselines::FedAvgConfig cfg;
  cfg.rounds = 3;
  cfg.local_epochs = 2;
  cfg.batch_size = 8;
  const auto res = baselines::fedavg_train(devices, init, cfg, 9);
  const auto& t = res.transcript;
  CHECK(proto::message_count(t, Direction::device_to_server) == 5 * 3);
  CHECK(proto::message_count(t, Direction::server_to_device) == 5 * 3);
  CHECK(proto::message_count(t, Direction::device_to_server, PayloadKind::model_params) == 5 * 3);
  CHECK(proto::round_count(t) == 3);
  CHECK(proto::uplink_cost(t) == 15 * init.parameter_count());

  const auto again = baselines::fedavg_train(devices, init, cfg, 9);
  CHECK(again.global == res.global);
  CHECK(again.transcript == res.transcript);

  cfg.rounds = 0;
  const auto none = baselines::fedavg_train(devices, init, cfg, 9);
  CHECK(none.global == init);
  CHECK(proto::message_count(none.transcript, Direction::device_to_server) == 0);
  CHECK(proto::message_count(none.transcript, Direction::server_to_device) == 5);

  cfg.rounds = 4;
  cfg.participation = 0.4;
  const auto partial = baselines::fedavg_train(devices, init, cfg, 9);
  CHECK(proto::message_count(partial.transcript, Direction::device_to_server) == 2 * 4);
}

TEST_CASE("fedavg: empty shards are skipped and bad labels rejected") {
  Rng rng(4);
  auto devices = one_user_devices(3, 10, rng);
  devices[1].local_data = data::LabeledDataset{Matrix(0, 3), {}, 3};
  const std::vector<std::size_t> dims{3, 4, 3};
  const auto init = nn::Network::random(dims, rng);
  baselines::FedAvgConfig cfg;
  cfg.rounds = 2;
  const auto res = baselines::fedavg_train(devices, init, cfg, 1);
  CHECK(proto::message_count(res.transcript, Direction::device_to_server) == 2 * 2);
  for (const auto& m : res.transcript.messages()) CHECK(m.device_id != 1);

  const std::vector<std::size_t> narrow{3, 4, 2};
  CHECK_THROWS_AS(baselines::fedavg_train(devices, nn::Network::random(narrow, rng), cfg, 1), ConfigError);
}

TEST_CASE("split_step: relayed gradients equal monolithic backprop") {
  Rng rng(5);
  const std::vector<std::size_t> dims{6, 10, 8, 7, 4};
  const auto net = nn::Network::random(dims, rng);
  const Matrix x = random_matrix(13, 6, rng);
  const auto y = faa::testing::random_labels(13, 4, rng);

  nn::ForwardCache cache;
  const auto lg = nn::softmax_xent(nn::forward(net, x, &cache), y);
  const auto whole = nn::backward(net, cache, lg.dlogits);

  for (std::size_t cut = 1; cut < net.layer_count(); ++cut) {
    const auto [front, back] = nn::split_model(net, cut);
    const auto step = baselines::split_step(front, back, x, y);
    CHECK(step.loss == doctest::Approx(lg.mean_loss).epsilon(1e-12));
    std::vector<nn::LayerGrad> joined = step.device_grads.layers;
    joined.insert(joined.end(), step.server_grads.layers.begin(), step.server_grads.layers.end());
    REQUIRE(joined.size() == whole.layers.size());
    double worst = 0.0;
    for (std::size_t l = 0; l < joined.size(); ++l) {
      worst = std::max(worst, (joined[l].weights - whole.layers[l].weights).cwiseAbs().maxCoeff());
      worst = std::max(worst, (joined[l].bias - whole.layers[l].bias).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-10);
    CHECK(step.uplink.activations().rows() == 13);
    CHECK(step.downlink.grads().rows() == 13);
  }
}

TEST_CASE("split learning: single device on separable data") {
  Rng rng(6);
  const auto d = blobs(2, 100, 3.0, rng);
  const auto devices = proto::make_devices({d}, 3);
  const std::vector<std::size_t> dims{3, 16, 8, 2};
  const auto net = nn::Network::random(dims, rng);
  baselines::SplitConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.01;
  cfg.cut = 1;
  const auto res = baselines::split_learning_train(devices, net, cfg);
  CHECK(res.epoch_losses.back() < res.epoch_losses.front());
  const auto full = nn::concat(res.model.extractor, res.model.classifier);
  CHECK(nn::accuracy(full, d.x, d.y) >= 0.95);
  CHECK(res.handoffs == 0);
  CHECK(res.batches == 20 * 13);
}

TEST_CASE("split learning: message counts and weight handoffs") {
  Rng rng(7);
  const int k = 4, epochs = 3, per_device = 20, bs = 8;
  const auto devices = one_user_devices(k, per_device, rng);
  const std::vector<std::size_t> dims{3, 8, 6, k};
  const auto net = nn::Network::random(dims, rng);
  baselines::SplitConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = bs;
  cfg.cut = 2;
  const auto res = baselines::split_learning_train(devices, net, cfg);
  const auto& t = res.transcript;
  const std::size_t batches_per_device = (per_device + bs - 1) / bs;
  CHECK(res.batches == static_cast<std::size_t>(k * epochs) * batches_per_device);
  CHECK(res.handoffs == static_cast<std::size_t>(k * epochs - 1));
  CHECK(proto::message_count(t, Direction::device_to_server, PayloadKind::activation_batch) == res.batches);
  CHECK(proto::message_count(t, Direction::server_to_device, PayloadKind::gradient_batch) == res.batches);
  // Handoff relays plus the final upload of the device part.
  CHECK(proto::message_count(t, Direction::device_to_server, PayloadKind::model_params) == res.handoffs + 1);
  CHECK(proto::message_count(t, Direction::device_to_server) == res.batches + res.handoffs + 1);
  CHECK(proto::message_count(t, Direction::device_to_server, PayloadKind::impression) == 0);

  baselines::SplitConfig bad = cfg;
  bad.cut = 5;
  CHECK_THROWS_AS(baselines::split_learning_train(devices, net, bad), Error);
}

TEST_CASE("one-class: hand Mahalanobis values") {
  baselines::OneClassModel m{0, Vector::Zero(2), Matrix::Zero(2, 2), 0.0};
  m.sigma_inv(0, 0) = 1.0;
  m.sigma_inv(1, 1) = 0.25;
  Vector f(2);
  f << 1, 2;
  CHECK(baselines::mahalanobis(m, f) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(baselines::mahalanobis(m, m.mu) == 0.0);

  Rng rng(8);
  baselines::OneClassModel id{0, random_matrix(5, 1, rng).col(0), Matrix::Identity(5, 5), 0.0};
  for (int i = 0; i < 20; ++i) {
    const Vector v = random_matrix(5, 1, rng).col(0);
    CHECK(baselines::mahalanobis(id, v) == doctest::Approx((v - id.mu).norm()).epsilon(1e-12));
  }
}

TEST_CASE("one-class: fit recovers the regularized inverse covariance") {
  Rng rng(9);
  const Matrix f = random_matrix(200, 4, rng);
  const auto m = baselines::oneclass_fit_features(f, 3, 1e-6);
  CHECK(m.user_id == 3);
  const Eigen::RowVectorXd mu = f.colwise().mean();
  const Matrix centered = f.rowwise() - mu;
  const Matrix sigma = centered.transpose() * centered / 200.0 + 1e-6 * Matrix::Identity(4, 4);
  CHECK((m.mu - mu.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((m.sigma_inv * sigma - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((m.sigma_inv - m.sigma_inv.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(m.sigma_inv).eigenvalues().minCoeff() >= -1e-8);
  CHECK_THROWS_AS(baselines::oneclass_fit_features(Matrix(0, 4), 0, 1e-6), InputError);
}

TEST_CASE("one-class: score is invariant under translations and axis scalings") {
  Rng rng(10);
  const Matrix f = random_matrix(100, 3, rng, 2.0);
  const Matrix probes = random_matrix(10, 3, rng, 3.0);
  const auto base = baselines::oneclass_fit_features(f, 0, 0.0);
  Eigen::RowVectorXd shift(3), scale(3);
  shift << 5, -2, 100;
  scale << 0.1, 3, 7;
  const Matrix moved = (f.array().rowwise() * scale.array()).matrix().rowwise() + shift;
  const auto other = baselines::oneclass_fit_features(moved, 0, 0.0);
  for (Eigen::Index r = 0; r < probes.rows(); ++r) {
    const Vector p = probes.row(r).transpose();
    const Vector q = (probes.row(r).array() * scale.array()).matrix().transpose() + shift.transpose();
    CHECK(baselines::mahalanobis(other, q) == doctest::Approx(baselines::mahalanobis(base, p)).epsilon(1e-8));
  }
}

TEST_CASE("one-class: scoring through an extractor") {
  Rng rng(11);
  const std::vector<std::size_t> dims{3, 5, 4};
  const auto ext = nn::Network::random(dims, rng);
  const auto d = blobs(1, 50, 0.0, rng, 2);
  const auto m = baselines::oneclass_fit(ext, d, 1e-6);
  CHECK(m.user_id == 2);
  const auto scores = baselines::oneclass_scores(m, ext, d.x);
  const Matrix feats = nn::forward(ext, d.x);
  for (Eigen::Index r = 0; r < d.x.rows(); ++r) {
    CHECK(scores[static_cast<std::size_t>(r)] ==
          doctest::Approx(baselines::mahalanobis(m, feats.row(r).transpose())).epsilon(1e-12));
    CHECK(baselines::oneclass_score(m, ext, d.x.row(r).transpose()) ==
          doctest::Approx(scores[static_cast<std::size_t>(r)]).epsilon(1e-12));
  }
}
