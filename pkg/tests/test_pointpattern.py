import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blastfrag.coords import build_cloud
from blastfrag.exceptions import DegenerateError, DomainError, UnsupportedOperationError
from blastfrag.spatial import radial_size_correlation, ripley_k
from blastfrag.spatial.pointpattern import clark_evans, k_estimate

from .conftest import make_ds


def _cloud(points, size=1000.0, scale=None):
    boxes = [[(x + 1) / 2 * size - 1, (1 - y) / 2 * size - 1, (x + 1) / 2 * size + 1, (1 - y) / 2 * size + 1] for x, y in points]
    return build_cloud(make_ds(boxes, width=size, height=size, scale=scale))


class TestRipley:
    def test_two_points(self):
        c = _cloud([(0.0, 0.0), (0.5, 0.0)])
        k = ripley_k(c, [0.1, 0.4999, 0.5, 0.8])
        assert k.k_observed == pytest.approx((0.0, 0.0, 4.0, 4.0))
        assert k.k_poisson == tuple(math.pi * r * r for r in (0.1, 0.4999, 0.5, 0.8))
        assert k.window_area == 4.0

    def test_zero_radius(self):
        assert k_estimate([(0, 0), (0, 0), (1, 1)], [0.0, 0.1], 4.0).tolist() == [0.0, 4 * 2 / 6]

    def test_metric_window(self):
        c = _cloud([(0.0, 0.0), (0.5, 0.0)], size=1000.0, scale=0.01)
        k = ripley_k(c, [2.0, 2.5], window="metric")  # points 250 px = 2.5 m apart
        assert k.window_area == pytest.approx(100.0)
        assert k.k_observed == pytest.approx((0.0, 100.0))
        with pytest.raises(UnsupportedOperationError):
            ripley_k(_cloud([(0, 0), (0.1, 0.1)]), [0.1], window="metric")

    def test_errors(self):
        with pytest.raises(DegenerateError):
            ripley_k(_cloud([(0, 0)]), [0.1])
        with pytest.raises(DomainError):
            ripley_k(_cloud([(0, 0), (0.2, 0.2)]), [0.2, 0.1])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_monotone_and_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        xy = rng.uniform(-1, 1, (int(rng.integers(2, 40)), 2))
        radii = np.sort(rng.uniform(0, 1.5, 12))
        k = k_estimate(xy, radii, 4.0)
        assert np.all(np.diff(k) >= 0)
        n = len(xy)
        for r, kv in zip(radii, k):
            pairs = sum(1 for i in range(n) for j in range(n) if i != j and math.dist(xy[i], xy[j]) <= r)
            assert kv == pytest.approx(4.0 * pairs / (n * (n - 1)) if r > 0 else 0.0)


class TestRadialCorrelation:
    def _ring(self, sizes_from_d):
        rng = np.random.default_rng(1)
        ang = rng.uniform(0, 2 * np.pi, 30)
        rad = rng.uniform(0.1, 0.9, 30)
        xy = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        xy -= xy.mean(axis=0)
        d = np.hypot(*xy.T)
        return xy, sizes_from_d(d)

    def test_perfect_positive(self):
        xy, s = self._ring(lambda d: 0.3 * d)
        assert radial_size_correlation(xy, s) == pytest.approx(1.0, abs=1e-12)

    def test_perfect_negative(self):
        xy, s = self._ring(lambda d: 2.0 - 0.5 * d)
        assert radial_size_correlation(xy, s) == pytest.approx(-1.0, abs=1e-12)

    def test_two_pass_oracle(self, rng):
        xy = rng.uniform(-1, 1, (50, 2))
        s = rng.uniform(0.01, 0.3, 50)
        mx = sum(p[0] for p in xy) / 50
        my = sum(p[1] for p in xy) / 50
        d = [math.hypot(p[0] - mx, p[1] - my) for p in xy]
        dbar, sbar = sum(d) / 50, sum(s) / 50
        num = sum((a - dbar) * (b - sbar) for a, b in zip(d, s))
        den = math.sqrt(sum((a - dbar) ** 2 for a in d) * sum((b - sbar) ** 2 for b in s))
        assert radial_size_correlation(xy, s) == pytest.approx(num / den, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 100), st.floats(-10, 10))
    def test_affine_invariance(self, seed, a, b):
        rng = np.random.default_rng(seed)
        xy = rng.uniform(-1, 1, (20, 2))
        s = rng.uniform(0.01, 0.3, 20)
        assert radial_size_correlation(xy, a * s + b) == pytest.approx(radial_size_correlation(xy, s), abs=1e-12)

    def test_degenerate(self):
        xy = np.array([[0.1, 0.2], [0.3, -0.1], [-0.4, 0.0]])
        with pytest.raises(DegenerateError):
            radial_size_correlation(xy, np.ones(3))
        with pytest.raises(DegenerateError):
            radial_size_correlation([(1, 0), (-1, 0), (0, 1), (0, -1)], [1, 2, 3, 4])
        with pytest.raises(DegenerateError):
            radial_size_correlation(xy[:2], [1, 2])


def test_clark_evans_lattice():
    g = np.array([(x, y) for x in range(10) for y in range(10)], dtype=float) + 0.5
    # square lattice: nearest neighbour distance 1, density 1 per unit area
    assert clark_evans(g, 100.0) == pytest.approx(2.0)
