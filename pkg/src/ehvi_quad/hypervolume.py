"""Exact hypervolume, hypervolume contribution and hypervolume improvement.

Minimisation throughout.  All measures are computed by slicing along the last
objective down to a two-dimensional staircase sweep, which is exact for any
m and fast enough for fronts of up to ~100 points.

:func:`improvement_batch` is the workhorse for the EHVI estimators: it
evaluates I(y, P) for many candidate points at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyFront, InvalidFront, PointNotInSet

__all__ = [
    "ParetoFrontSet",
    "dominates",
    "hv",
    "hv_contribution",
    "hv_improvement",
    "hv_improvement_definitional",
    "improvement_batch",
]


def dominates(a, b) -> bool:
    """True if ``a`` weakly improves on ``b`` everywhere and strictly somewhere."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


@dataclass(frozen=True, eq=False)
class ParetoFrontSet:
    """Mutually nondominated points, each strictly dominating ``reference``."""

    points: np.ndarray
    reference: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64, ndmin=2)
        ref = np.array(self.reference, dtype=np.float64).reshape(-1)
        if points.size == 0:
            raise EmptyFront("front has no points")
        if points.ndim != 2 or points.shape[1] != ref.shape[0]:
            raise DimensionMismatch(f"points {points.shape} vs reference {ref.shape}")
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(ref))):
            raise InvalidFront("non-finite coordinates")
        if not np.all(points < ref):
            raise InvalidFront("every front point must strictly dominate the reference point")
        le = np.all(points[:, None, :] <= points[None, :, :], axis=2)
        lt = np.any(points[:, None, :] < points[None, :, :], axis=2)
        if np.any(le & lt):
            raise InvalidFront("front points are not mutually nondominated")
        points.setflags(write=False)
        ref.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "reference", ref)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


def _hv_points(points: np.ndarray, ref: np.ndarray) -> float:
    """Measure of the union of boxes [p, ref]; points need not be nondominated."""
    points = points[np.all(points < ref, axis=1)]
    if len(points) == 0:
        return 0.0
    m = points.shape[1]
    if m == 1:
        return float(ref[0] - points[:, 0].min())
    if m == 2:
        order = np.lexsort((points[:, 1], points[:, 0]))
        xs = points[order, 0]
        hs = np.minimum.accumulate(points[order, 1])
        widths = np.diff(np.append(xs, ref[0]))
        return float(np.sum(widths * (ref[1] - hs)))
    order = np.argsort(points[:, -1], kind="stable")
    points = points[order]
    levels = np.append(points[:, -1], ref[-1])
    total = 0.0
    for j in range(len(points)):
        depth = levels[j + 1] - levels[j]
        if depth > 0:
            total += depth * _hv_points(points[: j + 1, :-1], ref[:-1])
    return total


def _check_dim(p: np.ndarray, p_set: ParetoFrontSet) -> None:
    if p.shape != (p_set.dim,):
        raise DimensionMismatch(f"point {p.shape} vs front dimension {p_set.dim}")


def hv(p_set: ParetoFrontSet) -> float:
    """Hypervolume indicator of the front with respect to its reference point."""
    return _hv_points(p_set.points, p_set.reference)


def hv_contribution(p_set: ParetoFrontSet, p) -> float:
    """hv(P) - hv(P minus {p})."""
    p = np.asarray(p, dtype=np.float64)
    _check_dim(p, p_set)
    hit = np.flatnonzero(np.all(p_set.points == p, axis=1))
    if hit.size == 0:
        raise PointNotInSet(f"{p} is not a member of the front")
    rest = np.delete(p_set.points, hit, axis=0)
    return hv(p_set) - _hv_points(rest, p_set.reference)


def hv_improvement(p, p_set: ParetoFrontSet) -> float:
    """I(p, P) by the clipping identity.

    I(p, P) = prod(r - p) - hv({max(q, p) : q in P}); zero when p is dominated
    by a front point or does not strictly dominate the reference point.
    """
    p = np.asarray(p, dtype=np.float64)
    _check_dim(p, p_set)
    ref = p_set.reference
    if not np.all(p < ref):
        return 0.0
    if np.any(np.all(p_set.points <= p, axis=1)):
        return 0.0
    clipped = np.maximum(p_set.points, p)
    return max(0.0, float(np.prod(ref - p)) - _hv_points(clipped, ref))


def hv_improvement_definitional(p, p_set: ParetoFrontSet) -> float:
    """I(p, P) = hv(P with p) - hv(P), evaluated literally."""
    p = np.asarray(p, dtype=np.float64)
    _check_dim(p, p_set)
    union = np.vstack([p_set.points, p])
    return _hv_points(union, p_set.reference) - hv(p_set)


def _staircase_improvement(y: np.ndarray, front: np.ndarray, ref: np.ndarray) -> np.ndarray:
    # y: (N, 2) with y < ref; front: (k, 2) with front < ref
    if len(front) == 0:
        return (ref[0] - y[:, 0]) * (ref[1] - y[:, 1])
    order = np.lexsort((front[:, 1], front[:, 0]))
    xs = front[order, 0]
    hs = np.minimum.accumulate(front[order, 1])
    cum = np.concatenate(([0.0], np.cumsum(hs[:-1] * np.diff(xs))))

    def area_to(x):
        # integral of the staircase height from xs[0] to x
        j = np.searchsorted(xs, x, side="right") - 1
        jc = np.clip(j, 0, None)
        inside = cum[jc] + hs[jc] * (x - xs[jc])
        return np.where(j < 0, ref[1] * (x - xs[0]), inside)

    cut = np.searchsorted(-hs, -y[:, 1], side="left")
    x_stop = np.where(cut < len(xs), xs[np.minimum(cut, len(xs) - 1)], ref[0])
    width = x_stop - y[:, 0]
    gain = area_to(x_stop) - area_to(y[:, 0]) - y[:, 1] * width
    return np.where(width > 0, np.maximum(gain, 0.0), 0.0)


def _improvement(y: np.ndarray, front: np.ndarray, ref: np.ndarray) -> np.ndarray:
    # y: (N, m) strictly below ref in every coordinate
    m = y.shape[1]
    if len(front) == 0:
        return np.prod(ref - y, axis=1)
    if m == 1:
        return np.maximum(front[:, 0].min() - y[:, 0], 0.0)
    if m == 2:
        return _staircase_improvement(y, front, ref)
    front = front[np.argsort(front[:, -1], kind="stable")]
    levels = np.concatenate(([-np.inf], front[:, -1], [ref[-1]]))
    out = np.zeros(len(y))
    last = y[:, -1]
    for j in range(len(front) + 1):
        depth = levels[j + 1] - np.maximum(levels[j], last)
        live = depth > 0
        if not np.any(live):
            continue
        out[live] += depth[live] * _improvement(y[live, :-1], front[:j, :-1], ref[:-1])
    return out


def improvement_batch(y, p_set: ParetoFrontSet) -> np.ndarray:
    """Hypervolume improvement I(y_i, P) for every row of ``y``.

    Equivalent to :func:`hv_improvement` row by row, but computed as the
    measure of [y, r] not dominated by P, slice by slice along the last
    objective, with a prefix-integral lookup on the 2-D staircase.
    """
    y = np.array(y, dtype=np.float64, ndmin=2)
    if y.shape[1] != p_set.dim:
        raise DimensionMismatch(f"points {y.shape} vs front dimension {p_set.dim}")
    out = np.zeros(len(y))
    inside = np.all(y < p_set.reference, axis=1)
    if np.any(inside):
        out[inside] = _improvement(y[inside], p_set.points, p_set.reference)
    return out
