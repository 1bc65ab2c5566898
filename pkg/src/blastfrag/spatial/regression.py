"""Power-law size/depth fit: OLS of log s on log z."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import DegenerateError


@dataclass(frozen=True)
class RegressionFit:
    alpha: float
    beta: float
    r_squared: float
    n_used: int


def ols_line(x, y):
    """Intercept, slope and R² of y ~ 1 + x via the normal equations.

    R² is reported as 0 when y is constant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    X = np.column_stack([np.ones_like(x), x])
    intercept, slope = np.linalg.solve(X.T @ X, X.T @ y)
    resid = y - (intercept + slope * x)
    sst = float(((y - y.mean()) ** 2).sum())
    if np.ptp(y) == 0 or sst == 0:
        r2 = 0.0
    else:
        r2 = 1.0 - float(resid @ resid) / sst
    return float(intercept), float(slope), r2


def fit_size_depth(cloud_or_zs, s=None) -> RegressionFit:
    """Fit ``log s = alpha + beta log z``.

    Accepts a FragmentCloud or separate ``z`` and ``s`` arrays.  Points with
    non-positive ``z`` or ``s`` are dropped; ``n_used`` counts survivors.
    """
    if s is None:
        z, s = cloud_or_zs.z, cloud_or_zs.s
    else:
        z, s = np.asarray(cloud_or_zs, dtype=float), np.asarray(s, dtype=float)
    ok = (z > 0) & (s > 0) & np.isfinite(z) & np.isfinite(s)
    n = int(ok.sum())
    if n < 3:
        raise DegenerateError(f"size-depth fit needs 3 usable points, got {n}")
    lz, ls = np.log(z[ok]), np.log(s[ok])
    if np.ptp(lz) == 0:
        raise DegenerateError("depth proxy is constant; slope undefined")
    alpha, beta, r2 = ols_line(lz, ls)
    return RegressionFit(alpha, beta, r2, n)
