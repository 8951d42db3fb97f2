"""Two-sample Welch t-test used by the controller's freezing rule.

Tail probabilities come from the regularized incomplete beta function, which
is exact for all degrees of freedom (no normal approximation needed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc


@dataclass(frozen=True)
class WelchResult:
    statistic: float
    df: float
    p_value: float  # two-sided


def student_t_sf(t: float, df: float) -> float:
    """P(T > t) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    p = 0.5 * float(betainc(df / 2.0, 0.5, x))
    return p if t >= 0 else 1.0 - p


def welch_t_test(a, b) -> WelchResult:
    """Two-sided Welch t-test for unequal means with unequal variances.

    Degenerate samples (zero variance on both sides) give p = 1.0 when the
    means agree and p = 0.0 otherwise, so a noiseless separation still counts
    as significant.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two observations")
    ma, mb = a.mean(), b.mean()
    va, vb = a.var(ddof=1), b.var(ddof=1)
    sa, sb = va / a.size, vb / b.size
    denom = sa + sb
    if denom == 0.0:
        same = ma == mb
        return WelchResult(0.0 if same else math.inf, float(a.size + b.size - 2),
                           1.0 if same else 0.0)
    t = (ma - mb) / math.sqrt(denom)
    df = denom**2 / (sa**2 / (a.size - 1) + sb**2 / (b.size - 1))
    p = 2.0 * student_t_sf(abs(t), df)
    return WelchResult(float(t), float(df), min(p, 1.0))


def welch_p_values_by_column(states: np.ndarray, values: np.ndarray,
                             columns: np.ndarray) -> np.ndarray:
    """Vectorized two-sided Welch p-values, one per selected column.

    ``states`` is a (K, N) boolean matrix; for each column index in
    ``columns`` the values are split into on/off groups.  Columns whose groups
    have fewer than two members get p = 1.0.
    """
    states = states[:, columns]
    k = values.size
    n_on = states.sum(axis=0)
    n_off = k - n_on
    sums_on = values @ states
    sq_on = (values**2) @ states
    total = values.sum()
    total_sq = (values**2).sum()
    p = np.ones(columns.size)
    ok = (n_on >= 2) & (n_off >= 2)
    if not np.any(ok):
        return p
    n1 = n_on[ok].astype(float)
    n0 = n_off[ok].astype(float)
    m1 = sums_on[ok] / n1
    m0 = (total - sums_on[ok]) / n0
    v1 = np.maximum(sq_on[ok] - n1 * m1**2, 0.0) / (n1 - 1)
    v0 = np.maximum((total_sq - sq_on[ok]) - n0 * m0**2, 0.0) / (n0 - 1)
    s1 = v1 / n1
    s0 = v0 / n0
    denom = s1 + s0
    pvals = np.ones(denom.size)
    zero = denom == 0.0
    pvals[zero] = np.where(m1[zero] == m0[zero], 1.0, 0.0)
    nz = ~zero
    if np.any(nz):
        t = np.abs(m1[nz] - m0[nz]) / np.sqrt(denom[nz])
        df = denom[nz] ** 2 / (s1[nz] ** 2 / (n1[nz] - 1) + s0[nz] ** 2 / (n0[nz] - 1))
        x = df / (df + t * t)
        tail = 0.5 * betainc(df / 2.0, 0.5, x)
        pvals[nz] = np.minimum(2.0 * tail, 1.0)
    out = p.copy()
    out[ok] = pvals
    return out
