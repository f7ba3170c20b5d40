# Copyright 2026 The FAA-Sim Authors
# SPDX-License-Identifier: Apache-2.0

import json
import math

import numpy as np
import pytest

import faa_sim


def tiny_config(out_dir):
    return {
        "experiment": "compare_methods",
        "seed": 3,
        "output_dir": str(out_dir),
        "population": {"users": 6, "dim": 6, "samples_per_user": 40, "separation": 6.0},
        "base_population": {"users": 6, "samples_per_user": 40},
        "net": {"hidden": [16, 8], "cut": 1},
        "base_training": {"epochs": 3, "batch_size": 32, "learning_rate": 0.01},
        "faa": {"M": 40, "epochs": 3, "batch_size": 32, "learning_rate": 0.01},
        "fedavg": {"rounds": 1, "local_epochs": 2},
        "split_learning": {"epochs": 2, "batch_size": 16},
        "eval": {"enrolled": 3},
        "unknown_ablation": {"unknown_counts": [1, 3]},
    }


def test_version():
    assert faa_sim.__version__ == "0.1.0"


def test_population_shape_and_determinism():
    x, y = faa_sim.gen_population(users=5, dim=4, samples_per_user=10, separation=3.0, seed=11)
    assert x.shape == (50, 4)
    assert y.shape == (50,)
    assert sorted(set(y.tolist())) == [0, 1, 2, 3, 4]
    mu, _ = faa_sim.impression(x[y == 2])
    np.testing.assert_allclose(mu, x[y == 2].mean(axis=0), atol=1e-12)
    x2, _ = faa_sim.gen_population(users=5, dim=4, samples_per_user=10, separation=3.0, seed=11)
    np.testing.assert_array_equal(x, x2)


def test_qiid_endpoints():
    assert faa_sim.compute_qiid([1] * 10, 10) == 0.0
    assert faa_sim.compute_qiid([10] * 10, 10) == 1.0
    x, y = faa_sim.gen_population(users=10, dim=3, samples_per_user=20, separation=2.0)
    devices, q = faa_sim.partition_by_qiid(x, y.tolist(), 10, 10, 0.0)
    assert q == 0.0
    assert sorted(i for d in devices for i in d) == list(range(200))


def test_impression_matches_numpy():
    rng = np.random.default_rng(0)
    f = rng.normal(size=(200, 5))
    mu, sigma = faa_sim.impression(f)
    np.testing.assert_allclose(mu, f.mean(axis=0), atol=1e-12)
    np.testing.assert_allclose(sigma, np.cov(f, rowvar=False, bias=True), atol=1e-12)


def test_cholesky_hand_example():
    sigma = np.array([[4.0, 2.0], [2.0, 3.0]])
    lower, jitter = faa_sim.chol_psd(sigma)
    # The factor is of sigma + jitter * I, so the hand values hold up to the jitter.
    np.testing.assert_allclose(lower, [[2.0, 0.0], [1.0, math.sqrt(2.0)]], atol=1e-5)
    np.testing.assert_allclose(lower @ lower.T, sigma + jitter * np.eye(2), atol=1e-6)
    assert jitter == pytest.approx(1e-6 * 3.5)


def test_sampler_moments():
    mu = np.array([1.0, -2.0, 0.5])
    sigma = np.diag([1.0, 4.0, 0.25])
    s = faa_sim.sample_features(mu, sigma, 10000, seed=5)
    assert s.shape == (10000, 3)
    assert np.linalg.norm(s.mean(axis=0) - mu) <= 0.05 * np.linalg.norm(mu) + 0.05
    assert np.linalg.norm(np.cov(s, rowvar=False, bias=True) - sigma) <= 0.1 * np.linalg.norm(sigma)


def test_best_ada():
    assert faa_sim.best_ada([0.0, 0.0], [1.0, 1.0])["ada"] == 1.0
    assert faa_sim.best_ada([0.5], [0.5])["ada"] == 0.5
    with pytest.raises(faa_sim.InputError):
        faa_sim.best_ada([], [1.0])


def test_validate_config(tmp_path):
    cfg = tiny_config(tmp_path)
    assert faa_sim.validate_config(json.dumps(cfg)) == []
    diags = faa_sim.validate_config(json.dumps(cfg), ["--faa.M=0"])
    assert [d["path"] for d in diags] == ["faa.M"]


def test_run_experiment(tmp_path):
    report = faa_sim.run_experiment(tiny_config(tmp_path / "out"))
    assert set(report["methods"]) == {"faa", "fedavg", "split_learning", "oneclass"}
    for entry in report["methods"].values():
        assert 0.0 <= entry["mean_ada"] <= 1.0
    assert (tmp_path / "out" / "report.json").exists()
    with pytest.raises(faa_sim.ConfigError):
        faa_sim.run_experiment(tiny_config(tmp_path), ["--faa.M=0"])
