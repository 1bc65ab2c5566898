"""Synthetic detection sets with known ground truth.

Scenes are built backwards from the coordinate construction: depth proxies
``z`` are drawn first and turned into mask areas that the forward pipeline
maps back onto the same ``z``; sizes follow ``s = exp(alpha + beta log z +
noise)`` and become bounding boxes with that normalized diagonal.

Randomness comes from ``numpy.random.Generator(PCG64(seed))``.  Geometry is
specified in the normalized frame (``x, y`` in [-1, 1], y up).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coords import DEFAULT_EPSILON
from .exceptions import DomainError
from .ingest import DetectionSet, Instance

PROCESSES = ("poisson", "clustered", "anisotropic")


@dataclass(frozen=True)
class SceneSpec:
    """Parameters of a synthetic scene.

    ``aniso_ratio`` is the ratio of axis variances of the anisotropic
    process, ``aniso_angle`` the major-axis direction in degrees
    counter-clockwise from +x.  ``spread`` is the per-cluster standard
    deviation of the clustered process.
    """

    n: int = 300
    beta_true: float = -2.8
    alpha_true: float = math.log(0.004)
    noise_sigma: float = 0.3
    process: str = "poisson"
    aniso_angle: float = 0.0
    aniso_ratio: float = 1.0
    aniso_major_sd: float = 0.25
    n_clusters: int = 2
    spread: float = 0.05
    centers: tuple[tuple[float, float], ...] | None = None
    width: int = 640
    height: int = 480
    scale: float | None = None
    depth_min: float = 0.3
    area_min: float = 0.002
    epsilon: float = DEFAULT_EPSILON
    seed: int = 0
    image_id: str = "synth"

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.aniso_ratio < 1:
            raise DomainError("aniso_ratio must be >= 1")
        if self.noise_sigma < 0:
            raise DomainError("noise_sigma must be >= 0")
        if self.process not in PROCESSES:
            raise DomainError(f"process must be one of {PROCESSES}, got {self.process!r}")
        if not 0 < self.depth_min <= 1:
            raise DomainError("depth_min must lie in (0, 1]")
        if not self.width > 0 or not self.height > 0:
            raise DomainError("image dimensions must be positive")
        if self.scale is not None and not self.scale > 0:
            raise DomainError("scale must be positive")
        if self.process == "clustered":
            if self.n_clusters < 1:
                raise DomainError("n_clusters must be >= 1")
            if self.centers is not None and len(self.centers) != self.n_clusters:
                raise DomainError("centers must list n_clusters points")
            if not self.spread > 0:
                raise DomainError("spread must be positive")
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("centers") is not None:
            d["centers"] = tuple(tuple(map(float, c)) for c in d["centers"])
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown scene fields: {sorted(unknown)}")
        return cls(**d)


def _inside(p):
    return (np.abs(p) <= 1.0).all(axis=1)


def _rejection(draw, n):
    """Collect ``n`` samples of ``draw(k)`` that fall inside the window."""
    out = np.empty((0, 2))
    while len(out) < n:
        cand = draw(max(2 * (n - len(out)), 16))
        out = np.vstack([out, cand[_inside(cand)]])
    return out[:n]


def sample_centroids(spec: SceneSpec, rng) -> np.ndarray:
    """Fragment centers in the normalized frame, shape (n, 2)."""
    n = spec.n
    if spec.process == "poisson":
        return rng.uniform(-1.0, 1.0, size=(n, 2))
    if spec.process == "anisotropic":
        t = math.radians(spec.aniso_angle)
        rot = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
        sd = np.array([spec.aniso_major_sd, spec.aniso_major_sd / math.sqrt(spec.aniso_ratio)])
        return _rejection(lambda k: (rng.standard_normal((k, 2)) * sd) @ rot.T, n)
    # clustered
    if spec.centers is None:
        centers = rng.uniform(-0.6, 0.6, size=(spec.n_clusters, 2))
    else:
        centers = np.asarray(spec.centers, dtype=float)
    out = np.empty((n, 2))
    for c, center in enumerate(centers):
        idx = np.arange(c, n, spec.n_clusters)
        out[idx] = _rejection(lambda k: center + spec.spread * rng.standard_normal((k, 2)), len(idx))
    return out


def sample_depths(spec: SceneSpec, rng) -> np.ndarray:
    """Log-uniform depth proxies on [depth_min, 1], rescaled so the maximum is 1."""
    z = np.exp(rng.uniform(math.log(spec.depth_min), 0.0, size=spec.n))
    return z / z.max()


def depth_to_area(z, area_min, epsilon):
    """Normalized mask areas whose forward depth proxies equal ``z``.

    The fragment with ``z = 1`` gets ``area_min``.
    """
    return (area_min + epsilon) / np.asarray(z, dtype=float) ** 2 - epsilon


def generate(spec: SceneSpec) -> DetectionSet:
    """Sample a :class:`DetectionSet` from ``spec``.

    Boxes keep the sampled center unless they would cross the image border,
    in which case the center is moved inward just enough.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    W, H = float(spec.width), float(spec.height)
    xy = sample_centroids(spec, rng)
    z = sample_depths(spec, rng)
    noise = rng.standard_normal(spec.n) * spec.noise_sigma
    conf = rng.uniform(0.5, 1.0, size=spec.n)

    a_norm = np.clip(depth_to_area(z, spec.area_min, spec.epsilon), 1.0 / (W * H), 0.25)
    s = np.exp(spec.alpha_true + spec.beta_true * np.log(z) + noise)
    # equal normalized width and height; a box cannot exceed the image
    half = np.minimum(s / math.sqrt(2.0), 1.0) / 2.0
    hw, hh = half * W, half * H
    cx = np.clip((xy[:, 0] + 1.0) / 2.0 * W, hw, W - hw)
    cy = np.clip((1.0 - xy[:, 1]) / 2.0 * H, hh, H - hh)

    instances = tuple(
        Instance(
            bbox=(
                max(float(cx[i] - hw[i]), 0.0),
                max(float(cy[i] - hh[i]), 0.0),
                min(float(cx[i] + hw[i]), W),
                min(float(cy[i] + hh[i]), H),
            ),
            mask_area=float(a_norm[i] * W * H),
            confidence=float(conf[i]),
        )
        for i in range(spec.n)
    )
    return DetectionSet(spec.image_id, W, H, spec.scale, instances)


def ground_truth(spec: SceneSpec) -> dict:
    """The sampled latent quantities, drawn from the same stream as :func:`generate`."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    xy = sample_centroids(spec, rng)
    z = sample_depths(spec, rng)
    noise = rng.standard_normal(spec.n) * spec.noise_sigma
    return {"xy": xy, "z": z, "noise": noise}
