import json
import math

import pytest

import pullsim


def test_closed_forms_and_optimum():
    p = pullsim.SystemParams.exponential(20, 1.0, 5.0)
    assert p.n == 20 and p.lam == 1.0
    assert pullsim.expected_aoi(p, 1) == pytest.approx(1.01)
    assert pullsim.expected_utility(p, 1) == pytest.approx(0.495050, abs=5e-7)
    k = pullsim.optimal_k_aoi(p)
    assert k.k_star == 8 and not k.is_tie
    assert pullsim.optimal_k_utility(p).k_star == 8
    assert pullsim.boundary_aoi(pullsim.SystemParams.exponential(20, 9.5, 1.0)).wait_one
    assert pullsim.harmonic(3) == pytest.approx(11 / 6)


def test_density_and_general_utility():
    p = pullsim.SystemParams.exponential(6, 1.3, 0.7)
    d = pullsim.hyperexp_density(p, 3)
    assert sum(d["weights"]) == pytest.approx(1.0, abs=1e-9)
    est = pullsim.expected_utility_general(p, 3)
    assert est["value"] == pytest.approx(pullsim.expected_utility(p, 3), abs=1e-6)
    step = pullsim.expected_utility_general(p, 3, lambda x: 1.0 if x < 2.0 else 0.0)
    assert 0.0 < step["value"] < 1.0


def test_simulation_matches_closed_form():
    p = pullsim.reference_setup(2)
    r = pullsim.run_sim(p, runs=20000, seed=3)
    assert len(r["mean"]) == 20
    for k, (mean, se) in enumerate(zip(r["mean"], r["std_error"]), start=1):
        assert abs(mean - pullsim.expected_aoi(p, k)) < 5 * se
    assert pullsim.run_sim(p, runs=20000, seed=3) == r


def test_bandit_and_errors():
    assert "ucb-lfg" in pullsim.algorithms()
    p = pullsim.reference_setup(3)
    t = pullsim.run_bandit("ucb-n", p, 2000, seed=4)
    assert len(t["arm"]) == 2000
    assert all(b >= a for a, b in zip(t["cum_regret"], t["cum_regret"][1:]))
    with pytest.raises(ValueError):
        pullsim.run_bandit("nope", p, 10)
    with pytest.raises(ValueError):
        pullsim.SystemParams.exponential(0, 1.0, 1.0)
    with pytest.raises(ValueError):
        pullsim.expected_aoi(pullsim.SystemParams(5, 1.0, pullsim.ResponseDist.gamma(2, 0.1)), 2)


def test_experiment_spec(tmp_path):
    out = tmp_path / "curve.csv"
    spec = {
        "kind": "aoi_curve",
        "params": {"n": 10, "lambda": 1.0, "response": {"family": "exponential", "nu": 5.0}},
        "runs": 5000,
        "seeds": [2],
        "output": str(out),
    }
    r = pullsim.run_experiment(json.dumps(spec))
    assert r["csv"].startswith("k,analytic,simulated,stderr\n")
    assert out.read_text() == r["csv"]
    manifest = json.loads((tmp_path / "curve.manifest.json").read_text())
    assert manifest["spec"]["runs"] == 5000
    assert not math.isnan(float(r["csv"].splitlines()[1].split(",")[2]))
