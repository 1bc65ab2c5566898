"""Cross-image analysis: feature vectors, z-scores, K-means, outliers, parameter regression."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import DegenerateError, DomainError
from .spatial.pointpattern import KFunction

# headline columns first, then everything else
TABLE_COLUMNS = ("image_id", "N", "mean_area", "median_area", "beta", "r_squared", "mean_edge")

NUMERIC_FEATURES = (
    "n_fragments",
    "mean_area",
    "median_area",
    "alpha",
    "beta",
    "r_squared",
    "lambda1",
    "lambda2",
    "var_ratio1",
    "anisotropy",
    "mean_edge",
    "std_edge",
    "min_edge",
    "max_edge",
    "radial_corr",
)

DEFAULT_CLUSTER_FEATURES = ("var_ratio1", "beta", "mean_edge", "radial_corr", "n_fragments")


@dataclass
class FeatureVector:
    """Descriptor set of one image.  Statistics that could not be computed are ``None``."""

    image_id: str
    n_fragments: int
    mean_area: float | None = None
    median_area: float | None = None
    alpha: float | None = None
    beta: float | None = None
    r_squared: float | None = None
    n_used: int | None = None
    lambda1: float | None = None
    lambda2: float | None = None
    var_ratio1: float | None = None
    var_ratio2: float | None = None
    anisotropy: float | None = None
    v1: tuple[float, float] | None = None
    mean_edge: float | None = None
    std_edge: float | None = None
    min_edge: float | None = None
    max_edge: float | None = None
    radial_corr: float | None = None
    bandwidth: float | None = None
    hotspots: tuple[tuple[float, float, float], ...] = ()
    k_function: KFunction | None = None
    width: float | None = None
    height: float | None = None
    scale: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["v1"] = list(self.v1) if self.v1 is not None else None
        d["hotspots"] = [list(h) for h in self.hotspots]
        if self.k_function is not None:
            k = asdict(self.k_function)
            d["k_function"] = {key: list(v) if isinstance(v, tuple) else v for key, v in k.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureVector":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        d = {key: val for key, val in d.items() if key in known}
        if d.get("v1") is not None:
            d["v1"] = tuple(d["v1"])
        d["hotspots"] = tuple(tuple(h) for h in d.get("hotspots") or ())
        kf = d.get("k_function")
        if kf is not None:
            d["k_function"] = KFunction(
                radii=tuple(kf["radii"]),
                k_observed=tuple(kf["k_observed"]),
                k_poisson=tuple(kf["k_poisson"]),
                window_area=kf["window_area"],
                window=kf.get("window", "normalized"),
            )
        return cls(**d)

    def value(self, name):
        if name == "N":
            return self.n_fragments
        return getattr(self, name)


@dataclass
class CorpusMatrix:
    rows: list[FeatureVector]
    features: tuple[str, ...]
    raw: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    normalized: np.ndarray
    constant: np.ndarray
    labels: np.ndarray | None = None
    centroids: np.ndarray | None = None
    outlier_flags: np.ndarray | None = None

    @property
    def image_ids(self):
        return [r.image_id for r in self.rows]


@dataclass(frozen=True)
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    objective_history: tuple[float, ...]
    n_iter: int

    @property
    def objective(self) -> float:
        return self.objective_history[-1]


@dataclass(frozen=True)
class ParamRegression:
    gamma0: float
    gamma: tuple[float, ...]
    r_squared: float
    parameter_name: str = "P"
    features: tuple[str, ...] = field(default_factory=tuple)


# -- normalization -----------------------------------------------------------


def feature_matrix(rows, features=DEFAULT_CLUSTER_FEATURES) -> np.ndarray:
    out = np.empty((len(rows), len(features)))
    for i, row in enumerate(rows):
        for j, name in enumerate(features):
            val = row.value(name)
            if val is None:
                raise DegenerateError(f"{row.image_id}: feature {name!r} is undefined")
            out[i, j] = float(val)
    return out


def zscore(X):
    """Column z-scores with the N-1 standard deviation.

    Returns ``(Z, mu, sigma, constant)``; constant columns map to 0.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) < 2:
        raise DegenerateError("normalization needs at least 2 rows")
    mu = X.mean(axis=0)
    sigma = X.std(axis=0, ddof=1)
    constant = np.ptp(X, axis=0) == 0
    safe = np.where(constant, 1.0, sigma)
    Z = np.where(constant, 0.0, (X - mu) / safe)
    sigma = np.where(constant, 0.0, sigma)
    return Z, mu, sigma, constant


def normalize(rows, features=DEFAULT_CLUSTER_FEATURES) -> CorpusMatrix:
    """Stack ``rows`` and z-score the selected features across images."""
    rows = list(rows)
    features = tuple(features)
    if len(rows) < 2:
        raise DegenerateError("normalization needs at least 2 images")
    X = feature_matrix(rows, features)
    Z, mu, sigma, constant = zscore(X)
    return CorpusMatrix(rows, features, X, mu, sigma, Z, constant)


# -- clustering --------------------------------------------------------------


def _sq_dists(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def kmeans_pp(X, k, rng) -> np.ndarray:
    """k-means++ seeding; falls back to uniform choice once all mass is covered."""
    n = len(X)
    chosen = [int(rng.integers(n))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(free))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[chosen].copy()


def kmeans(matrix, k=3, seed=0, max_iter=100) -> KMeansResult:
    """Lloyd's algorithm from a seeded k-means++ start.

    ``objective_history`` holds the within-cluster sum of squares after the
    first assignment and after every centroid update; it never increases.
    Empty clusters keep their previous centroid.
    """
    X = matrix.normalized if isinstance(matrix, CorpusMatrix) else np.asarray(matrix, dtype=float)
    n = len(X)
    if k < 1:
        raise DomainError("k must be >= 1")
    if k > n:
        raise DomainError(f"k={k} exceeds the number of rows ({n})")
    rng = np.random.Generator(np.random.PCG64(seed))
    C = kmeans_pp(X, k, rng)
    labels = np.argmin(_sq_dists(X, C), axis=1)
    history = [float(_sq_dists(X, C)[np.arange(n), labels].sum())]
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        for j in range(k):
            members = X[labels == j]
            if len(members):
                C[j] = members.mean(axis=0)
        d = _sq_dists(X, C)
        history.append(float(d[np.arange(n), labels].sum()))
        new = np.argmin(d, axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
    return KMeansResult(labels, C, tuple(history), n_iter)


def flag_outliers(matrix, labels=None, centroids=None, t=3.0) -> np.ndarray:
    """Rows farther from their centroid than ``t`` times the median such distance."""
    if isinstance(matrix, CorpusMatrix):
        X = matrix.normalized
        labels = matrix.labels if labels is None else labels
        centroids = matrix.centroids if centroids is None else centroids
    else:
        X = np.asarray(matrix, dtype=float)
    n = len(X)
    if n < 2:
        return np.zeros(n, dtype=bool)
    if labels is None or centroids is None:
        labels = np.zeros(n, dtype=int)
        centroids = X.mean(axis=0, keepdims=True)
    dist = np.sqrt(((X - np.asarray(centroids)[labels]) ** 2).sum(axis=1))
    return dist > t * np.median(dist)


# -- regression --------------------------------------------------------------


def _collinear_columns(X, names):
    design = np.ones((len(X), 1))
    rank = 1
    bad = []
    for j in range(X.shape[1]):
        trial = np.column_stack([design, X[:, j]])
        r = np.linalg.matrix_rank(trial)
        if r > rank:
            design, rank = trial, r
        else:
            bad.append(names[j])
    return bad


def param_regression(matrix, params, features=None, parameter_name="P") -> ParamRegression:
    """OLS of a blast parameter on ``[1, f_1, ..., f_J]``."""
    if isinstance(matrix, CorpusMatrix):
        X = matrix.raw
        names = tuple(features or matrix.features)
        if features is not None:
            X = X[:, [matrix.features.index(f) for f in features]]
    else:
        X = np.asarray(matrix, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        names = tuple(features or (f"f{j}" for j in range(X.shape[1])))
    y = np.asarray(params, dtype=float)
    n, p = X.shape
    if len(y) != n:
        raise DomainError("one parameter value per row is required")
    if n < p + 2:
        raise DomainError(f"need at least {p + 2} rows for {p} features, got {n}")
    bad = _collinear_columns(X, names)
    if bad:
        raise DomainError(f"design matrix is rank deficient; collinear columns: {', '.join(bad)}")
    D = np.column_stack([np.ones(n), X])
    coef = np.linalg.solve(D.T @ D, D.T @ y)
    resid = y - D @ coef
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 0.0 if sst == 0 else 1.0 - float(resid @ resid) / sst
    return ParamRegression(float(coef[0]), tuple(float(c) for c in coef[1:]), r2, parameter_name, names)


def finite_or_none(x):
    return None if x is None or not math.isfinite(x) else x
