"""Pareto-front point sets for the test problems, CSV ingestion and reference points.

Fronts are sampled directly on the known optimal surfaces of the DTLZ/WFG
families rather than by optimising those problems:

========================  ============================================
LINEAR (DTLZ1, WFG3)      sum(f) = 0.5, f >= 0
CONCAVE_SPHERE (DTLZ2-4)  ||f|| = 1, f >= 0
CONCAVE_ELLIPSOID (WFG4)  sum((f_i / (2 i))^2) = 1, f >= 0
CONVEX                    ||1 - f|| = 1, 0 <= f <= 1
DISCONNECTED (DTLZ7)      f_m = 2 (m - sum_{i<m} f_i / 2 (1 + sin(3 pi f_i)))
========================  ============================================
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidSpec, ParseError, ReferenceNotDominated
from .gaussians import bounding_box
from .hypervolume import ParetoFrontSet
from .numerics import RngStream, standard_normal

__all__ = [
    "Shape",
    "FrontSpec",
    "RefPolicy",
    "surface_points",
    "generate_front",
    "nondominated_filter",
    "reference_point",
    "load_front",
    "save_front",
]

DEFAULT_FRONT_SIZE = 50


class Shape(str, enum.Enum):
    LINEAR = "linear"
    CONCAVE_SPHERE = "concave"
    CONCAVE_ELLIPSOID = "ellipsoid"
    CONVEX = "convex"
    DISCONNECTED = "disconnected"


@dataclass(frozen=True)
class FrontSpec:
    shape: Shape
    m: int = 2
    count: int = DEFAULT_FRONT_SIZE
    scale: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        if self.m < 2:
            raise InvalidSpec("fronts need m >= 2 objectives")
        if self.count < 1:
            raise InvalidSpec("count must be >= 1")
        if self.scale is not None:
            scale = tuple(float(s) for s in self.scale)
            if len(scale) != self.m or min(scale) <= 0:
                raise InvalidSpec(f"scale must hold {self.m} positive radii")
            object.__setattr__(self, "scale", scale)

    @property
    def radii(self) -> np.ndarray:
        if self.scale is not None:
            return np.array(self.scale)
        if self.shape is Shape.CONCAVE_ELLIPSOID:
            return 2.0 * np.arange(1, self.m + 1)
        return np.ones(self.m)


@dataclass(frozen=True)
class RefPolicy:
    """BOX_UPPER: upper corner of the 30%-widened bounding box.
    NADIR_PLUS_MARGIN: nadir point plus an absolute ``margin``."""

    kind: str = "BOX_UPPER"
    margin: float = 0.1

    @classmethod
    def parse(cls, text: str) -> "RefPolicy":
        """'box' / 'box_upper' or 'nadir[:margin]'."""
        name, _, arg = text.strip().partition(":")
        name = name.lower()
        if name in ("box", "box_upper"):
            return cls("BOX_UPPER")
        if name in ("nadir", "nadir_plus_margin"):
            return cls("NADIR_PLUS_MARGIN", float(arg) if arg else 0.1)
        raise InvalidSpec(f"unknown reference policy {text!r}")


def _positive_sphere(rng: RngStream, count: int, m: int) -> np.ndarray:
    z = np.abs(standard_normal(rng, count * m).reshape(count, m))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _quarter_circle(count: int) -> np.ndarray:
    theta = np.linspace(0.0, 0.5 * math.pi, count)
    pts = np.column_stack((np.cos(theta), np.sin(theta)))
    pts[-1, 0] = 0.0
    return pts


def surface_points(spec: FrontSpec, rng: RngStream | None = None) -> np.ndarray:
    """Points on the shape's optimal surface, before nondominance filtering.

    For m == 2 the points are evenly spaced and ``rng`` is unused; for m >= 3
    they are drawn at random from ``rng`` (seed 0 if omitted).
    """
    rng = RngStream(0) if rng is None else rng
    m, count, shape = spec.m, spec.count, spec.shape
    if shape is Shape.LINEAR:
        if m == 2:
            f1 = np.linspace(0.0, 0.5, count)
            base = np.column_stack((f1, 0.5 - f1))
        else:
            e = -np.log(rng.uniform(count * m).reshape(count, m))
            base = 0.5 * e / e.sum(axis=1, keepdims=True)
    elif shape in (Shape.CONCAVE_SPHERE, Shape.CONCAVE_ELLIPSOID):
        base = _quarter_circle(count) if m == 2 else _positive_sphere(rng, count, m)
    elif shape is Shape.CONVEX:
        base = 1.0 - (_quarter_circle(count) if m == 2 else _positive_sphere(rng, count, m))
    elif shape is Shape.DISCONNECTED:
        x = np.linspace(0.0, 1.0, count)[:, None] if m == 2 else rng.uniform(count * (m - 1)).reshape(count, m - 1)
        last = 2.0 * (m - np.sum(x / 2.0 * (1.0 + np.sin(3.0 * math.pi * x)), axis=1))
        base = np.column_stack((x, last))
    else:  # pragma: no cover
        raise InvalidSpec(f"unsupported shape {shape}")
    return base * spec.radii


def nondominated_filter(points) -> np.ndarray:
    """Maximal mutually nondominated subset, first occurrence of duplicates kept, order preserved."""
    pts = np.array(points, dtype=np.float64, ndmin=2)
    if pts.size == 0:
        raise ValueError("no points to filter")
    le = np.all(pts[:, None, :] <= pts[None, :, :], axis=2)
    lt = np.any(pts[:, None, :] < pts[None, :, :], axis=2)
    dominated = np.any(le & lt, axis=0)
    equal = le & ~lt
    earlier_twin = np.any(np.tril(equal, -1), axis=1)
    return pts[~dominated & ~earlier_twin]


def reference_point(points, policy: RefPolicy = RefPolicy()) -> np.ndarray:
    pts = np.array(points, dtype=np.float64, ndmin=2)
    if policy.kind == "BOX_UPPER":
        ref = bounding_box(pts).upper
    elif policy.kind == "NADIR_PLUS_MARGIN":
        ref = pts.max(axis=0) + policy.margin
    else:
        raise InvalidSpec(f"unknown reference policy {policy.kind!r}")
    if not np.all(pts < ref):
        raise ReferenceNotDominated(f"reference {ref} is not strictly dominated by every point")
    return ref


def generate_front(
    spec: FrontSpec,
    rng: RngStream | None = None,
    policy: RefPolicy = RefPolicy(),
) -> ParetoFrontSet:
    """Sample the surface, drop dominated points and attach a reference point."""
    pts = nondominated_filter(surface_points(spec, rng))
    return ParetoFrontSet(pts, reference_point(pts, policy))


def load_front(path, reference=None, policy: RefPolicy = RefPolicy()) -> ParetoFrontSet:
    """Read a CSV front: one point per line, optional non-numeric header row."""
    rows = []
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or all(not cell.strip() for cell in row):
                    continue
                try:
                    rows.append([float(cell) for cell in row])
                except ValueError:
                    if lineno == 1 and not rows:
                        continue
                    raise ParseError(f"{path}:{lineno}: non-numeric value in {row}") from None
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no points")
    if len({len(r) for r in rows}) != 1:
        raise ParseError(f"{path}: rows have differing numbers of columns")
    pts = np.array(rows)
    ref = reference_point(pts, policy) if reference is None else np.asarray(reference, dtype=np.float64)
    return ParetoFrontSet(pts, ref)


def save_front(points, path) -> None:
    """Write points as CSV with round-trip exact decimal values."""
    pts = points.points if isinstance(points, ParetoFrontSet) else np.array(points, ndmin=2)
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in pts:
            writer.writerow([repr(float(v)) for v in row])
