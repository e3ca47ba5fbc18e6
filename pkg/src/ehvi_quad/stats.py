"""Kendall rank correlation (tau-b) with a two-sided normal-approximation p-value."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, TooFewSamples

__all__ = ["KendallResult", "kendall_tau"]


@dataclass(frozen=True)
class KendallResult:
    tau: float
    p_value: float
    n: int

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha


def _tie_sums(x: np.ndarray) -> tuple[float, float, float]:
    _, counts = np.unique(x, return_counts=True)
    t = counts[counts > 1].astype(np.float64)
    return (
        float(np.sum(t * (t - 1) / 2)),
        float(np.sum(t * (t - 1) * (2 * t + 5))),
        float(np.sum(t * (t - 1) * (t - 2))),
    )


def kendall_tau(a, b) -> KendallResult:
    """Tau-b over all n(n-1)/2 pairs.

    The p-value uses the tie-corrected variance of the S statistic
    (concordant minus discordant pairs).  When either input is constant the
    coefficient is undefined and both fields are NaN.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise LengthMismatch(f"{a.size} vs {b.size}")
    n = a.size
    if n < 2:
        raise TooFewSamples("need at least two observations")
    iu = np.triu_indices(n, 1)
    da = np.sign(a[:, None] - a[None, :])[iu]
    db = np.sign(b[:, None] - b[None, :])[iu]
    s = float(np.sum(da * db))
    n0 = n * (n - 1) / 2
    ties_a, va, wa = _tie_sums(a)
    ties_b, vb, wb = _tie_sums(b)
    denom = math.sqrt((n0 - ties_a) * (n0 - ties_b))
    if denom == 0:
        return KendallResult(math.nan, math.nan, n)
    tau = max(-1.0, min(1.0, s / denom))
    var = (n * (n - 1) * (2 * n + 5) - va - vb) / 18.0
    if n > 2:
        var += wa * wb / (9.0 * n * (n - 1) * (n - 2))
    var += 2 * ties_a * 2 * ties_b / (2.0 * n * (n - 1))
    if var <= 0:
        return KendallResult(tau, 1.0, n)
    z = s / math.sqrt(var)
    return KendallResult(tau, float(math.erfc(abs(z) / math.sqrt(2.0))), n)
