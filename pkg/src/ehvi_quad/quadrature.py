"""Gauss-Hermite rules for the standard normal kernel and their m-dimensional grids.

The pipeline is ``hermite_rule -> tensor_grid -> prune -> transform``;
:func:`gh_grid` composes the four stages.  A grid built this way integrates
against N(mu, Sigma):

    E[f(Y)] ~= sum_i weights[i] * f(nodes[i])
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import EmptyGrid, NodeBudgetExceeded, NotPositiveDefinite, OrderOutOfRange
from .numerics import eigen_sym

__all__ = [
    "DEFAULT_NODE_BUDGET",
    "QuadratureRule1D",
    "QuadratureGrid",
    "hermite_rule",
    "node_count",
    "tensor_grid",
    "prune",
    "transform",
    "gh_grid",
]

DEFAULT_NODE_BUDGET = 10**7
MAX_ORDER = 100  # the int8 multi-index relies on this


@dataclass(frozen=True)
class QuadratureRule1D:
    order: int
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class QuadratureGrid:
    """Weighted nodes in m dimensions.

    ``index`` holds, for every node, the position of each coordinate in the
    1-D rule it was built from; it drives the deterministic tie-break in
    :func:`prune` and survives the affine transform.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    index: np.ndarray
    order: int
    prune_rate: float = 0.0
    transformed: bool = False

    def __len__(self) -> int:
        return len(self.weights)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=np.float64)))


def _orthonormal_hermite(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (p_n(x), p_{n-1}(x), sum_{k<n} p_k(x)^2) for orthonormal probabilists' Hermite p_k."""
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    christoffel = np.zeros_like(x)
    for k in range(n):
        christoffel += p * p
        p_prev, p = p, (x * p - math.sqrt(k) * p_prev) / math.sqrt(k + 1)
    return p, p_prev, christoffel


@lru_cache(maxsize=None)
def _rule_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 1:
        x, w = np.zeros(1), np.ones(1)
        x.setflags(write=False)
        w.setflags(write=False)
        return x, w
    # Golub-Welsch: nodes are eigenvalues of the symmetric tridiagonal
    # Jacobi matrix of the monic recurrence He_{k+1} = x He_k - k He_{k-1}.
    off = np.sqrt(np.arange(1, n, dtype=np.float64))
    jacobi = np.diag(off, 1) + np.diag(off, -1)
    x = np.sort(eigen_sym(jacobi, tol=1e-7).values)
    # Newton polish on p_n, using p_n' = sqrt(n) p_{n-1}
    for _ in range(8):
        pn, pn1, _ = _orthonormal_hermite(n, x)
        step = pn / (math.sqrt(n) * pn1)
        x = x - step
        if np.max(np.abs(step)) <= 1e-15 * max(1.0, np.max(np.abs(x))):
            break
    x = 0.5 * (x - x[::-1])
    # Christoffel weights keep full relative accuracy in the far tails,
    # where squared eigenvector components would not.
    _, _, christoffel = _orthonormal_hermite(n, x)
    w = 1.0 / christoffel
    w = 0.5 * (w + w[::-1])
    w /= w.sum()
    if n % 2:
        x[n // 2] = 0.0
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def hermite_rule(n: int) -> QuadratureRule1D:
    """n-point Gauss-Hermite rule for the standard normal density.

    Nodes ascend, weights sum to one, and the rule is exact for polynomials
    of degree <= 2n - 1.
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_ORDER:
        raise OrderOutOfRange(f"order must be an integer in [1, {MAX_ORDER}], got {n!r}")
    x, w = _rule_arrays(int(n))
    return QuadratureRule1D(int(n), x, w)


def node_count(n: int, m: int, r: float) -> int:
    """K = floor(n**m * (1 - r)), evaluated in exact rational arithmetic."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"prune rate must lie in [0, 1], got {r}")
    return math.floor(n**m * (1 - Fraction(str(r))))


def tensor_grid(rule: QuadratureRule1D, m: int, budget: int = DEFAULT_NODE_BUDGET) -> QuadratureGrid:
    """Full product grid: every m-tuple of 1-D nodes, weight = product of 1-D weights."""
    n = rule.order
    if m < 1:
        raise ValueError("m must be >= 1")
    total = n**m
    if total > budget:
        raise NodeBudgetExceeded(
            f"{n}**{m} = {total} nodes exceeds the budget of {budget}; use Monte Carlo instead"
        )
    # rows come out in lexicographic multi-index order; prune relies on this
    index = np.indices((n,) * m, dtype=np.int8).reshape(m, total).T
    nodes = rule.nodes[index]
    # Multiply the factors in ascending order so equal multisets give
    # bit-identical weights.  The rule is symmetric and its weights grow
    # towards the centre, so sorting the folded index min(i, n-1-i) orders
    # the factors without a float sort.
    folded = np.minimum(index, n - 1 - index)
    folded.sort(axis=1)
    weights = np.prod(rule.weights[folded], axis=1)
    return QuadratureGrid(m, nodes, weights, index, n)


def prune(grid: QuadratureGrid, r: float, renormalize: bool = False) -> QuadratureGrid:
    """Keep the floor(n**m * (1 - r)) highest-weight nodes.

    Equal weights are broken by lexicographic order of the node's
    multi-index.  Kept nodes stay in multi-index order.  Weights are left
    as-is unless ``renormalize`` is set, so a pruned grid integrates the
    constant function to slightly less than one.
    """
    if grid.transformed:
        raise ValueError("prune expects an untransformed grid")
    keep = node_count(grid.order, grid.dim, r)
    if keep == 0:
        raise EmptyGrid(f"prune rate {r} leaves no nodes")
    if keep >= len(grid):
        weights = grid.weights / grid.weights.sum() if renormalize else grid.weights
        return replace(grid, weights=weights, prune_rate=float(r))
    w = grid.weights
    cutoff = np.partition(w, len(w) - keep)[len(w) - keep]
    selected = w > cutoff
    # rows are in multi-index order, so the first ties are the lexicographically smallest
    ties = np.flatnonzero(w == cutoff)[: keep - int(selected.sum())]
    selected[ties] = True
    weights = w[selected]
    if renormalize:
        weights = weights / weights.sum()
    return replace(
        grid,
        nodes=grid.nodes[selected],
        weights=weights,
        index=grid.index[selected],
        prune_rate=float(r),
    )


def transform(grid: QuadratureGrid, g) -> QuadratureGrid:
    """Map standard-normal nodes z to mu + E diag(sqrt(lam)) z.

    ``g`` is anything with ``mean`` and ``cov`` attributes; (lam, E) is the
    eigendecomposition of its covariance.
    """
    mean = np.asarray(g.mean, dtype=np.float64)
    if mean.shape != (grid.dim,):
        raise ValueError(f"density dimension {mean.shape} does not match grid dimension {grid.dim}")
    eig = eigen_sym(g.cov)
    if np.any(eig.values <= 0.0):
        raise NotPositiveDefinite(f"covariance eigenvalues {eig.values}")
    rot = eig.vectors * np.sqrt(eig.values)
    return replace(grid, nodes=mean + grid.nodes @ rot.T, transformed=True)


def gh_grid(
    g,
    n: int,
    r: float = 0.2,
    budget: int = DEFAULT_NODE_BUDGET,
    renormalize: bool = False,
) -> QuadratureGrid:
    """Pruned, rotated, scaled and translated Gauss-Hermite grid for N(g.mean, g.cov)."""
    m = len(np.asarray(g.mean))
    grid = tensor_grid(hermite_rule(n), m, budget=budget)
    return transform(prune(grid, r, renormalize=renormalize), g)
