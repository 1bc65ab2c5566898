import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blastfrag.coords import build_cloud
from blastfrag.exceptions import DegenerateError
from blastfrag.spatial import fit_size_depth
from blastfrag.spatial.regression import ols_line
from blastfrag.synth import SceneSpec, generate

Z = np.array([0.2, 0.4, 0.6, 0.8, 1.0])


def test_noiseless_power_law():
    f = fit_size_depth(Z, Z**-3.0)
    assert f.alpha == pytest.approx(0.0, abs=1e-10)
    assert f.beta == pytest.approx(-3.0, abs=1e-10)
    assert f.r_squared == pytest.approx(1.0, abs=1e-10)
    assert f.n_used == 5


def test_constant_size():
    f = fit_size_depth(Z, np.full(5, 0.07))
    assert f.beta == pytest.approx(0.0, abs=1e-12)
    assert f.r_squared == 0.0


def test_synthetic_scene():
    spec = SceneSpec(n=300, beta_true=-2.8, noise_sigma=0.3, seed=5)
    f = fit_size_depth(build_cloud(generate(spec)))
    assert f.beta == pytest.approx(-2.8, abs=0.1)
    assert 0.8 <= f.r_squared <= 0.95


def test_excludes_non_positive():
    z = np.array([0.2, 0.4, 0.0, 0.8, 1.0, 0.5])
    s = np.array([1.0, 2.0, 3.0, -1.0, 0.5, 0.7])
    assert fit_size_depth(z, s).n_used == 4


def test_degenerate():
    with pytest.raises(DegenerateError):
        fit_size_depth([0.5, 1.0], [1.0, 2.0])
    with pytest.raises(DegenerateError):
        fit_size_depth([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 80))
def test_residual_orthogonality_and_closed_form(seed, n):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.5, 0.0, n)
    y = rng.normal(0.3 - 2.5 * x, 0.4)
    a, b, r2 = ols_line(x, y)
    eps = y - a - b * x
    assert abs(eps.sum()) <= 1e-9
    assert abs((eps * x).sum()) <= 1e-9
    xm, ym = x.mean(), y.mean()
    slope = ((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum()
    assert b == pytest.approx(slope, abs=1e-12, rel=1e-12)
    assert a == pytest.approx(ym - slope * xm, abs=1e-12, rel=1e-12)
    assert r2 <= 1.0
