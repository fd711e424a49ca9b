import math
import os
from pathlib import Path

import numpy as np
import pytest

import cicontrol as cc

RECIPES = Path(os.environ.get("CICONTROL_RECIPES", Path(__file__).parents[2] / "recipes"))


def test_equilibrium_geometry():
    p = cc.PhysicalParams.strontium_reference()
    geo = cc.derive_geometry(p)
    assert geo.z0 == pytest.approx(4.31e-6, rel=5e-3)
    assert cc.solve_z0(p) == geo.z0
    assert geo.omega_bar_x < p.omega_x


def test_invalid_params_raise():
    p = cc.PhysicalParams.strontium_reference()
    p.m = -1.0
    with pytest.raises(ValueError):
        p.validate()


def test_surfaces_have_a_degenerate_node():
    p = cc.PhysicalParams.strontium_reference()
    model = cc.internal_model(p)
    g = cc.make_grid(-64, 64, -32, 32, 32, 32)
    s = cc.surfaces(model, g)
    assert s["E_plus"].shape == (32, 32)
    assert np.all(s["E_plus"] >= s["E_minus"])
    assert s["ci"] == (0.0, 0.0)
    assert cc.mixing_angle(0.0, 1.0) == 0.0


def test_evolve_conserves_norm():
    model = cc.internal_model(cc.PhysicalParams.strontium_reference())
    g = cc.make_grid(-128, 128, -64, 64, 32, 32)
    r = cc.evolve(model, g, cc.Mode.spinor, 2e-3, [0.0] * 50, (-11.4, 0.0))
    assert len(r["t"]) == 51
    assert r["qx"][0] == pytest.approx(-11.4, rel=1e-6)
    assert np.max(np.abs(r["norm"] - 1.0)) < 1e-12


def test_optimize_is_monotone():
    model = cc.internal_model(cc.PhysicalParams.strontium_reference())
    g = cc.make_grid(-128, 128, -64, 64, 32, 32)
    r = cc.optimize(model, g, cc.Mode.bo, 2e-3, [0.0] * 100, (-11.4, 0.0), (11.4, 0.0),
                    alpha0=0.1, max_iters=2)
    J = r["J"]
    assert len(J) == r["iterations"] + 1
    assert np.all(np.diff(J) >= -1e-6)
    assert cc.plateau_iteration(list(J)) <= r["iterations"]


def test_config_round_trip_and_errors():
    c = cc.load_config([str(RECIPES / "fig2.cfg")])
    assert c.mode == cc.Mode.spinor
    again = cc.parse_config(cc.manifest(c))
    assert cc.manifest(again) == cc.manifest(c)
    missing = r"missing required key \[physical\] polarizability_down"
    with pytest.raises(cc.ConfigError, match=missing):
        cc.parse_config("[physical]\nmass_kg = 1\n")


def test_equilibrium_command_writes_csv(tmp_path):
    c = cc.load_config([str(RECIPES / "fig1.cfg")])
    text = cc.cmd_equilibrium(c, tmp_path)
    assert "z0" in text
    assert (tmp_path / "equilibrium.csv").exists()


def test_crossing_count():
    wave = [5.0 * math.cos(2 * math.pi * 3 * n / 600) for n in range(601)]
    assert cc.crossing_count(wave, 0.0) == 6
