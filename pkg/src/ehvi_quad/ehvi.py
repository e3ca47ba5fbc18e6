"""Expected hypervolume improvement of a Gaussian predictive density.

Four routes:

* :func:`ehvi_mc` -- sample mean of I(p_i, P) over draws from the density.
* :func:`ehvi_gh` -- weighted sum of I over a Gauss-Hermite grid.
* :func:`ehvi_exact_2d` -- closed form for independent bivariate densities.
* :func:`ehvi_reference` -- dense midpoint-rule integration, used as ground
  truth where no closed form is available (m <= 3).
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError, NotBivariate, NotIndependent, ResolutionTooLow
from .gaussians import GaussianDensity, sample
from .hypervolume import ParetoFrontSet, hv, improvement_batch
from .numerics import RngStream, eigen_sym
from .quadrature import DEFAULT_NODE_BUDGET, gh_grid

__all__ = [
    "Method",
    "EhviEstimate",
    "ehvi_mc",
    "ehvi_gh",
    "ehvi_exact_2d",
    "ehvi_reference",
    "psi",
]

MIN_VARIANCE = 1e-15
REFERENCE_HALF_WIDTH = 6.0
_CHUNK = 1 << 18


class Method(str, enum.Enum):
    MC = "MC"
    GH = "GH"
    EXACT2D = "EXACT2D"
    REFERENCE = "REFERENCE"


@dataclass(frozen=True)
class EhviEstimate:
    value: float
    method: Method
    evaluations: int
    mc_std_error: float | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.mc_std_error is not None) != (self.method == Method.MC):
            raise ValueError("mc_std_error is reported for Monte Carlo estimates only")
        if self.value < 0:
            raise ValueError(f"negative EHVI {self.value}")

    def __float__(self) -> float:
        return self.value


def _check_dims(g: GaussianDensity, p_set: ParetoFrontSet) -> None:
    if g.dim != p_set.dim:
        raise ConfigError(f"density has dimension {g.dim}, front has {p_set.dim}")


def ehvi_mc(g: GaussianDensity, p_set: ParetoFrontSet, c: int, rng: RngStream) -> EhviEstimate:
    """Monte Carlo EHVI from ``c`` draws; standard error = sample std / sqrt(c)."""
    _check_dims(g, p_set)
    c = int(c)
    if c < 1:
        raise ConfigError("sample count must be >= 1")
    gains = improvement_batch(sample(g, rng, c), p_set)
    err = float(gains.std(ddof=1) / math.sqrt(c)) if c > 1 else 0.0
    return EhviEstimate(float(gains.mean()), Method.MC, c, mc_std_error=err)


def ehvi_gh(
    g: GaussianDensity,
    p_set: ParetoFrontSet,
    n: int,
    r: float = 0.2,
    budget: int = DEFAULT_NODE_BUDGET,
    renormalize: bool = False,
) -> EhviEstimate:
    """Gauss-Hermite EHVI: sum of node weight times improvement at the node."""
    _check_dims(g, p_set)
    grid = gh_grid(g, n, r, budget=budget, renormalize=renormalize)
    value = grid.integrate(improvement_batch(grid.nodes, p_set))
    return EhviEstimate(max(value, 0.0), Method.GH, len(grid), info={"n": int(n), "prune": float(r)})


def psi(a, b, mu, sigma):
    """sigma * phi((b - mu)/sigma) + (a - mu) * Phi((b - mu)/sigma).

    psi(a, b) = E[(a - Y) 1{Y < b}] for Y ~ N(mu, sigma^2).
    """
    t = (np.asarray(b, dtype=np.float64) - mu) / sigma
    pdf = np.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    return sigma * pdf + (np.asarray(a, dtype=np.float64) - mu) * ndtr(t)


def _clamped_std(g: GaussianDensity) -> np.ndarray:
    var = np.diag(g.cov).copy()
    tiny = var < MIN_VARIANCE
    if np.any(tiny):
        warnings.warn(f"variances {var[tiny]} clamped to {MIN_VARIANCE}", RuntimeWarning, stacklevel=3)
        var[tiny] = MIN_VARIANCE
    return np.sqrt(var)


def ehvi_exact_2d(g: GaussianDensity, p_set: ParetoFrontSet) -> EhviEstimate:
    """Closed-form EHVI for an independent bivariate density.

    The region improvable over the front is split into vertical strips
    [a_j, b_j) x (-inf, h_j): one left of the first point (h = r_2), then one
    per front point sorted by f1 (h = that point's f2, b = next point's f1
    or r_1).  Independence factorises each strip's expectation into

        E[(b - max(a, Y1))^+] * E[(h - Y2)^+]

    and both factors are combinations of :func:`psi`.
    """
    if g.dim != 2 or p_set.dim != 2:
        raise NotBivariate(f"closed form needs m == 2, got density {g.dim}, front {p_set.dim}")
    if not g.independent:
        raise NotIndependent("closed form needs a diagonal covariance")
    mu1, mu2 = g.mean
    s1, s2 = _clamped_std(g)
    ref = p_set.reference
    pts = p_set.points[np.argsort(p_set.points[:, 0], kind="stable")]
    lower = np.concatenate(([-np.inf], pts[:, 0]))
    upper = np.concatenate((pts[:, 0], [ref[0]]))
    height = np.concatenate(([ref[1]], pts[:, 1]))

    full = psi(upper, upper, mu1, s1)
    finite = np.isfinite(lower)
    la = np.where(finite, lower, 0.0)
    partial = (upper - la) * ndtr((la - mu1) / s1) + full - psi(upper, la, mu1, s1)
    width_term = np.where(finite, partial, full)
    height_term = psi(height, height, mu2, s2)
    value = float(np.sum(width_term * height_term))
    return EhviEstimate(max(value, 0.0), Method.EXACT2D, 0)


def _midpoint_value(g: GaussianDensity, p_set: ParetoFrontSet, rot: np.ndarray, cells: int) -> float:
    m = g.dim
    step = 2.0 * REFERENCE_HALF_WIDTH / cells
    z1 = -REFERENCE_HALF_WIDTH + step * (np.arange(cells) + 0.5)
    w1 = np.exp(-0.5 * z1 * z1) / math.sqrt(2.0 * math.pi) * step
    z = np.stack(np.meshgrid(*([z1] * m), indexing="ij"), axis=-1).reshape(-1, m)
    w = np.prod(np.stack(np.meshgrid(*([w1] * m), indexing="ij"), axis=-1).reshape(-1, m), axis=1)
    total = 0.0
    for start in range(0, len(w), _CHUNK):
        pts = g.mean + z[start:start + _CHUNK] @ rot.T
        total += float(np.dot(w[start:start + _CHUNK], improvement_batch(pts, p_set)))
    return total


_DEFAULT_CELLS = {1: (400, 6400), 2: (200, 1600), 3: (50, 200)}


def ehvi_reference(
    g: GaussianDensity,
    p_set: ParetoFrontSet,
    cells_per_dim: int | None = None,
    rtol: float = 0.005,
    max_cells: int | None = None,
) -> EhviEstimate:
    """Dense midpoint-rule EHVI over mean +- 6 sd along each principal axis.

    The grid is doubled until two successive values agree to ``rtol``
    (relative), or to 1e-12 * hv(P) in absolute terms for values that are
    essentially zero; the finer value is returned.  Raises ResolutionTooLow
    if ``max_cells`` is reached first.
    """
    _check_dims(g, p_set)
    m = g.dim
    if m > 3:
        raise ConfigError("reference integration supports m <= 3")
    default_cells, default_max = _DEFAULT_CELLS[m]
    cells = default_cells if cells_per_dim is None else int(cells_per_dim)
    max_cells = default_max if max_cells is None else int(max_cells)
    if cells < 50:
        raise ConfigError("cells_per_dim must be >= 50")
    eig = eigen_sym(g.cov)
    rot = eig.vectors * np.sqrt(np.maximum(eig.values, MIN_VARIANCE))
    atol = 1e-12 * hv(p_set)
    coarse = _midpoint_value(g, p_set, rot, cells)
    evaluations = cells**m
    while 2 * cells <= max_cells:
        cells *= 2
        fine = _midpoint_value(g, p_set, rot, cells)
        evaluations += cells**m
        change = abs(fine - coarse)
        if change <= rtol * abs(fine) or change <= atol:
            return EhviEstimate(max(fine, 0.0), Method.REFERENCE, evaluations, info={"cells": cells})
        coarse = fine
    raise ResolutionTooLow(f"midpoint rule not converged at {cells} cells per dimension")
