import json
import math
import os
import subprocess
import sys
import tempfile

import numpy as np
import pytest

import rlfa


def sphere(n, d, seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, d))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def test_version():
    assert rlfa.__version__ == "0.1.0"


def test_solve_exact_matches_policy_evaluation():
    mdp = rlfa.random_mdp(3, 2, 3, seed=11)
    sol = rlfa.solve_exact(mdp)
    assert sol["j_star"] >= 0.0
    assert len(sol["q_star"]) == 3
    j_greedy = rlfa.evaluate_policy(mdp, sol["greedy_actions"])
    assert j_greedy == pytest.approx(sol["j_star"], abs=1e-12)
    # Any other deterministic policy cannot beat the optimum.
    worse = rlfa.evaluate_policy(mdp, [[1, 1, 1], [0, 0, 0], [1, 0, 1]])
    assert worse <= sol["j_star"] + 1e-12


def test_softmax_gap_sandwich():
    mdp = rlfa.random_mdp(3, 3, 2, seed=5)
    q = rlfa.solve_exact(mdp)["q_star"]
    cert = rlfa.softmax_gap(mdp, q, beta=2.0)
    assert cert["gap"] >= -1e-10
    assert cert["bound"] >= cert["gap"] - 1e-9
    # Exact Q leaves only the entropy term.
    assert cert["error_term"] == pytest.approx(0.0, abs=1e-12)


def test_gram_and_mercer_identities():
    pts = sphere(24, 3, seed=0)
    k = rlfa.gaussian_kernel(alpha=1.0)
    gram = rlfa.gram(k, pts)
    assert gram.shape == (24, 24)
    assert np.allclose(gram, gram.T)
    assert np.allclose(np.diag(gram), 1.0)

    rho = np.full(24, 1.0 / 24)
    spec = rlfa.mercer_spectrum(k, pts, rho)
    lam = spec["eigenvalues"]
    assert np.all(np.diff(lam) <= 1e-12)
    assert spec["trace"] == pytest.approx(float(np.sum(lam)), abs=1e-10)
    # Reconstruction reproduces the kernel matrix.
    psi = spec["eigenfunctions"]
    rebuilt = (psi * lam) @ psi.T
    assert np.allclose(rebuilt, gram, atol=1e-8)


def test_power_function_vanishes_on_centers():
    pts = sphere(10, 3, seed=3)
    k = rlfa.laplacian_kernel(alpha=0.7)
    centers = pts[:4]
    assert rlfa.power_function(k, centers, centers[0]) == pytest.approx(
        0.0, abs=1e-6
    )
    away = rlfa.power_function(k, centers, pts[9])
    assert 0.0 < away <= 1.0 + 1e-9


def test_krr_interpolates_at_zero_ridge():
    pts = sphere(16, 3, seed=4)
    rng = np.random.default_rng(4)
    y = rng.normal(size=16)
    k = rlfa.gaussian_kernel(alpha=0.8)
    pred = rlfa.krr_predict(k, pts, y, 0.0, pts)
    assert np.allclose(pred, y, atol=1e-7)


def test_perturbation_response_and_delta():
    pts = sphere(6, 3, seed=6)
    rng = np.random.default_rng(6)
    pi = rng.dirichlet(np.ones(6), size=3)
    nu = np.full(6, 1.0 / 6)
    k = rlfa.gaussian_kernel(alpha=1.0)

    blind = rlfa.perturbation_response(k, pts, nu, 0.0, pi)
    seen = rlfa.perturbation_response(k, pts, nu, 0.3, pi)
    assert 0.0 <= blind["value"] <= seen["value"] + 1e-12
    assert seen["dual_gap"] >= -1e-12

    delta = rlfa.delta_complexity(k, pts, pi, 0.3)
    assert delta["value"] <= seen["value"] + 1e-9
    assert delta["nu"].sum() == pytest.approx(1.0, abs=1e-9)


def test_concentration_closed_forms():
    uniform = np.full(5, 0.2)
    same = rlfa.concentration([uniform], [uniform.reshape(1, -1)])
    assert same["value"] == pytest.approx(1.0, abs=1e-12)
    point = np.zeros(5)
    point[2] = 1.0
    spiked = rlfa.concentration([uniform], [point.reshape(1, -1)])
    assert spiked["value"] == pytest.approx(math.sqrt(5.0), abs=1e-12)


def test_run_scenario_roundtrip(tmp_path):
    out = rlfa.run_scenario(
        json.dumps({"scenario": "exact-dp", "seed": 1, "constant_reward": 1.0}),
        str(tmp_path / "run"),
    )
    assert out["has_assertions"] is False
    assert out["headline"] == pytest.approx(3.0)
    assert "exact_dp.csv" in out["tables"]
    assert (tmp_path / "run" / "metadata.json").exists()
    meta = json.loads(out["metadata"])
    assert meta["scenario"] == "exact-dp"


def test_validation_errors_surface_as_value_error():
    with pytest.raises(ValueError):
        rlfa.run_scenario(json.dumps({"scenario": "no-such-thing"}))
    with pytest.raises(ValueError):
        rlfa.random_mdp(0, 2, 2, seed=1)


@pytest.fixture(scope="module")
def cli():
    path = os.environ.get("RLFA_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("RLFA_CLI not set")
    return path


def test_cli_exit_codes(cli, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(
        json.dumps({"scenario": "exact-dp", "seed": 1, "out": str(tmp_path / "a")})
    )
    done = subprocess.run(
        [cli, "run", "--config", str(cfg)], capture_output=True, text=True
    )
    assert done.returncode == 0, done.stderr
    assert "headline" in done.stdout

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scenario": "exact-dp", "typo_key": 1}))
    rejected = subprocess.run(
        [cli, "run", "--config", str(bad)], capture_output=True, text=True
    )
    assert rejected.returncode == 2
