import json
import math

import numpy as np
import pytest

import gstate


def test_default_config_round_trips_through_the_hash():
    cfg = gstate.default_config()
    assert set(cfg) >= {"problem", "grid", "solver", "sweep", "minimize"}
    assert gstate.config_hash(cfg) == gstate.config_hash(json.loads(json.dumps(cfg)))
    other = gstate.make_config(grid={"n": cfg["grid"]["n"] + 1})
    assert gstate.config_hash(other) != gstate.config_hash(cfg)
    assert len(gstate.config_hash(cfg)) == 16


def test_soliton_mass_and_profile():
    cfg = gstate.make_config(grid={"n": 16384, "outer_radius": 30.0}, sweep={"lambda": -1.0})
    res = gstate.solve(cfg)
    assert res["converged"]
    assert abs(res["mass"] - 4.0) < 1e-4
    # u = sqrt(2) sech(x) on the half line
    exact = math.sqrt(2.0) / np.cosh(res["r"])
    assert np.max(np.abs(res["u"] - exact)) < 1e-4
    assert res["morse_index"] == 1
    assert all(r["pass"] for r in res["identities"])


def test_branch_mass_derivative():
    cfg = gstate.make_config(grid={"n": 2048, "outer_radius": 40.0},
                             sweep={"lambda_start": -2.0, "lambda_end": -0.5})
    b = gstate.continue_branch(cfg, morse=False)
    assert not b["truncated"]
    assert np.all(b["mass_derivative"] < 0)
    np.testing.assert_allclose(b["mass_derivative"], -2.0 / np.sqrt(-b["lambda"]), rtol=2e-3)
    assert b["sign_pattern"]["pass"]


def test_mass_curve_cubic_level():
    cfg = gstate.make_config(grid={"n": 2048, "outer_radius": 40.0}, sweep={"c_grid": [1.0, 2.0]})
    curve = gstate.mass_curve(cfg)
    np.testing.assert_allclose(curve["m"], [-c**3 / 12 for c in (1.0, 2.0)], rtol=1e-3)
    np.testing.assert_allclose(curve["lambda"], [-c**2 / 4 for c in (1.0, 2.0)], rtol=1e-3)


def test_invalid_power_raises_validation_error():
    with pytest.raises(gstate.ValidationError):
        gstate.solve(gstate.make_config(problem={"p": 1.5}))
    with pytest.raises(ValueError):
        gstate.solve(gstate.make_config(problem={"p": 1.5}))


def test_cli_and_verify_round_trip(tmp_path):
    code, out, err = gstate.run_cli(["solve", "--n", "4096", "--R", "30", "--out", str(tmp_path)])
    assert code == 0, err
    assert "mass" in out
    res = gstate.verify(str(tmp_path / "solution.json"))
    assert res["kind"] == "solution"
    assert res["reproduced"]
    with pytest.raises(gstate.ValidationError):
        gstate.verify(str(tmp_path / "solution.json"), expected_hash="0" * 16)
    assert gstate.run_cli(["solve", "--p", "1.5", "--out", str(tmp_path)])[0] == 2
