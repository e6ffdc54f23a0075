import json
import math

import numpy as np
import pytest

import limitflow


def test_catalog_sorted_and_described():
    ids = limitflow.list_experiments()
    assert len(ids) >= 10
    assert ids == sorted(ids)
    schema = limitflow.describe("fermion-rg")
    assert "params" in json.dumps(schema)


def test_unknown_experiment_hint():
    with pytest.raises(ValueError, match="classical-limit"):
        limitflow.describe("clasical-limit")


def test_unknown_key_rejected():
    with pytest.raises(ValueError):
        limitflow.run_experiment({"experiment": "constant-smoke", "bogus": 1})


def test_constant_smoke_report():
    report = limitflow.run_experiment({"experiment": "constant-smoke", "params": {"dim": 2}})
    assert report["pass"] is True


def test_cap_exceeded_exit_code(tmp_path):
    code, _ = limitflow.run({"experiment": "mean-field", "params": {"N_max": 12}}, tmp_path / "cap")
    assert code == 3


def test_run_writes_deterministic_outputs(tmp_path):
    cfg = {"experiment": "thompson"}
    assert limitflow.run(cfg, tmp_path / "a")[0] == 0
    assert limitflow.run(cfg, tmp_path / "b")[0] == 0
    for name in ("verdict.json", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_tail_verdict():
    assert limitflow.tail_verdict([1.0, 0.1, 1e-4, 1e-5, 1e-6], 1e-3) == "convergent"
    assert limitflow.tail_verdict([1.0, 1.0, 1.0, 1.0], 1e-3) == "divergent"


def test_thompson_action_is_isometric_and_composes():
    rng = np.random.default_rng(3)
    a = limitflow.thompson.PLMap.generator_a()
    b = limitflow.thompson.PLMap.generator_b()
    xi = rng.normal(size=8) + 1j * rng.normal(size=8)
    scale, out = limitflow.thompson.act(a, 3, xi)
    assert scale == 4
    assert math.isclose(np.linalg.norm(out), np.linalg.norm(xi), rel_tol=1e-13)
    assert a.inverse().after(a) == limitflow.thompson.PLMap.identity()
    with pytest.raises(limitflow.Refused):
        limitflow.thompson.act(b, 1, np.ones(2, dtype=complex))


def test_fermion_dispersion_approaches_continuum():
    k = 2 * math.pi / 2.0
    exact = limitflow.fermion.limit_dispersion(1.0, k)
    defects = [abs(limitflow.fermion.rescaled_dispersion(n, 1.0, k) - exact) for n in (4, 5, 6)]
    assert defects[0] > defects[1] > defects[2]
    assert np.asarray(limitflow.fermion.kernel(3, 0.0, 1.0)).shape == (2, 2)
    taps = limitflow.fermion.filter_taps("db4")
    assert math.isclose(sum(abs(t) ** 2 for t in taps), 1.0, rel_tol=1e-14)
