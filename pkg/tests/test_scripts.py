import importlib.util
import sys
from fractions import Fraction
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


def load(name):
    spec = importlib.util.spec_from_file_location(name, SCRIPTS / f"{name}.py")
    mod = importlib.util.module_from_spec(spec)
    sys.modules[name] = mod  # dataclasses resolve annotations through sys.modules
    spec.loader.exec_module(mod)
    return mod


def test_sft_sweep():
    m = load("sft_shadowing_sweep")
    rows = m.run(m.SweepConfig(min_exp=4, max_exp=6, window=16, trials=5))
    assert [r["delta"] for r in rows] == [Fraction(1, 16), Fraction(1, 32), Fraction(1, 64)]
    assert all(r["failures"] == 0 and r["worst"] <= r["bound"] for r in rows)


def test_product_diameter():
    m = load("product_horseshoe_diameter")
    rows = m.run(m.DiameterConfig((2, 3, 5), 2, 3))
    assert [r["k"] for r in rows] == [6, 15]
    assert all(r["observed"] <= r["ceiling"] and r["violations"] == 0 for r in rows)


def test_cat_local_product():
    m = load("cat_map_local_product")
    r = m.run(m.LocalProductConfig(pairs=5, steps=30))
    assert r["residual"] < 1e-90
    assert r["forward_rate"] == pytest.approx(r["lam_s"], rel=1e-9)
    assert r["backward_rate"] == pytest.approx(r["inv_lam_u"], rel=1e-9)
