"""Multivariate Gaussian predictive densities and random test-density generators."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpan, DimensionMismatch
from .hypervolume import ParetoFrontSet
from .numerics import RngStream, as_sym_matrix, cholesky, sample_wishart, standard_normal

__all__ = [
    "GaussianDensity",
    "FrontBox",
    "bounding_box",
    "random_independent",
    "random_correlated",
    "sample",
    "diag_only",
]

BOX_MARGIN = 0.3
VARIANCE_FLOOR = 1e-9
OFFDIAG_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GaussianDensity:
    """N(mean, cov).  ``independent`` is derived from the covariance."""

    mean: np.ndarray
    cov: np.ndarray
    independent: bool = field(init=False)

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64).reshape(-1)
        cov = as_sym_matrix(self.cov)
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(f"mean {mean.shape} vs covariance {cov.shape}")
        if not np.all(np.isfinite(mean)):
            raise ValueError("mean has non-finite entries")
        cholesky(cov)
        mean.setflags(write=False)
        cov.setflags(write=False)
        off = cov - np.diag(np.diag(cov))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "independent", bool(np.all(np.abs(off) <= OFFDIAG_TOL)))

    @classmethod
    def from_variances(cls, mean, variances) -> "GaussianDensity":
        return cls(mean, np.diag(np.asarray(variances, dtype=np.float64)))

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov))

    def to_record(self) -> dict:
        return {"mean": self.mean.tolist(), "cov": self.cov.tolist()}

    @classmethod
    def from_record(cls, record: dict) -> "GaussianDensity":
        return cls(record["mean"], record["cov"])

    def to_json(self) -> str:
        return json.dumps(self.to_record())

    @classmethod
    def from_json(cls, text: str) -> "GaussianDensity":
        return cls.from_record(json.loads(text))


@dataclass(frozen=True)
class FrontBox:
    lower: np.ndarray
    upper: np.ndarray

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower


def bounding_box(p_set, margin: float = BOX_MARGIN) -> FrontBox:
    """Front extent widened by ``margin`` times the span on each side, per objective.

    Accepts a ParetoFrontSet or a bare (k, m) point array.
    """
    points = p_set.points if isinstance(p_set, ParetoFrontSet) else np.array(p_set, dtype=np.float64, ndmin=2)
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    span = hi - lo
    if np.any(span <= 0):
        raise DegenerateSpan(f"front has zero span in objective(s) {np.flatnonzero(span <= 0).tolist()}")
    return FrontBox(lo - margin * span, hi + margin * span)


def _random_mean(box: FrontBox, rng: RngStream) -> np.ndarray:
    return box.lower + box.span * rng.uniform(box.lower.size)


def random_independent(p_set, rng: RngStream) -> GaussianDensity:
    """Mean uniform in the front box; variances uniform on [eps, u_i - l_i]."""
    box = bounding_box(p_set)
    mean = _random_mean(box, rng)
    floor = VARIANCE_FLOOR * box.span
    variances = floor + (box.span - floor) * rng.uniform(box.lower.size)
    return GaussianDensity.from_variances(mean, variances)


def random_correlated(p_set, rng: RngStream, dof: int | None = None) -> GaussianDensity:
    """Mean uniform in the front box; covariance D W D / dof with W ~ Wishart(I, dof).

    D = diag(sqrt(u_i - l_i)), so the expected variances equal the box spans.
    ``dof`` defaults to m + 2.
    """
    box = bounding_box(p_set)
    m = box.lower.size
    dof = m + 2 if dof is None else int(dof)
    mean = _random_mean(box, rng)
    scale = np.sqrt(box.span)
    cov = (scale[:, None] * sample_wishart(rng, m, dof) * scale[None, :]) / dof
    return GaussianDensity(mean, cov)


def sample(g: GaussianDensity, rng: RngStream, count: int) -> np.ndarray:
    """``count`` draws from g as a (count, m) array: x = mu + L z."""
    count = int(count)
    if count < 1:
        raise ValueError("count must be >= 1")
    L = cholesky(g.cov)
    z = standard_normal(rng, count * g.dim).reshape(count, g.dim)
    return g.mean + z @ L.T


def diag_only(g: GaussianDensity) -> GaussianDensity:
    """Drop the covariances, keeping only the marginal variances."""
    if g.independent:
        return g
    return GaussianDensity.from_variances(g.mean, np.diag(g.cov))
