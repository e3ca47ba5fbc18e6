"""Random numbers and small dense linear algebra.

Everything here is written for matrices of modest size (objective-space
covariances with m <= 10, and Jacobi matrices of order <= 100 for the
quadrature rules).  Accuracy and reproducibility matter more than speed.

Random streams use a counter-based SplitMix64 generator: the k-th draw of a
stream with seed ``s`` is ``mix64(s + k * 0x9E3779B97F4A7C15)``.  The output
depends only on (seed, counter), so sequences are identical across runs and
platforms.  Streams are single-owner mutable objects; parallel workers should
derive independent streams with :meth:`RngStream.spawn` (``seed ^ index``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DofTooSmall, NoConvergence, NotPositiveDefinite

__all__ = [
    "RngStream",
    "EigenDecomposition",
    "as_sym_matrix",
    "cholesky",
    "eigen_sym",
    "standard_normal",
    "sample_wishart",
]

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TWO_M53 = 2.0 ** -53

# relative pivot floor used by cholesky
PIVOT_TOL = 1e-12


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class RngStream:
    """Counter-based uniform/normal generator (SplitMix64 + Box-Muller)."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed) & _MASK64
        self.counter = 0

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, counter={self.counter})"

    def spawn(self, index: int) -> "RngStream":
        """Independent stream for task ``index``: seed' = seed XOR index."""
        return RngStream(self.seed ^ (int(index) & _MASK64))

    def raw(self, count: int) -> np.ndarray:
        """Next ``count`` 64-bit words."""
        count = int(count)
        idx = np.arange(self.counter + 1, self.counter + count + 1, dtype=np.uint64)
        self.counter += count
        z = np.uint64(self.seed) + idx * _GOLDEN
        return _mix64(z)

    def uniform(self, count: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """Uniform draws on the open interval (low, high)."""
        u = ((self.raw(count) >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53
        if low == 0.0 and high == 1.0:
            return u
        return low + (high - low) * u

    def standard_normal(self, count: int) -> np.ndarray:
        return standard_normal(self, count)


def standard_normal(rng: RngStream, count: int) -> np.ndarray:
    """Standard normal draws by the Box-Muller transform.

    Uniforms are consumed in pairs, so an odd ``count`` discards one variate.
    """
    count = int(count)
    if count < 1:
        raise ValueError("count must be >= 1")
    pairs = (count + 1) // 2
    u = rng.uniform(2 * pairs)
    radius = np.sqrt(-2.0 * np.log(u[0::2]))
    angle = 2.0 * np.pi * u[1::2]
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:count]


def as_sym_matrix(a, rtol: float = 1e-10) -> np.ndarray:
    """Validate a square, symmetric matrix and return an exactly symmetric copy."""
    a = np.array(a, dtype=np.float64, ndmin=2)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T)) > rtol * max(scale, 1e-300):
        raise ValueError("matrix is not symmetric")
    return 0.5 * (a + a.T)


def cholesky(a) -> np.ndarray:
    """Lower-triangular L with L @ L.T == a.

    Raises NotPositiveDefinite when a pivot falls to or below
    ``PIVOT_TOL * max(diag(a))``.  The threshold is relative so that
    uniformly tiny covariances (near point masses) still factor.
    """
    a = as_sym_matrix(a)
    m = a.shape[0]
    scale = float(np.max(np.diag(a)))
    if not scale > 0.0:
        raise NotPositiveDefinite("matrix has no positive diagonal entry")
    floor = PIVOT_TOL * scale
    L = np.zeros_like(a)
    for j in range(m):
        pivot = a[j, j] - np.dot(L[j, :j], L[j, :j])
        if pivot <= floor:
            raise NotPositiveDefinite(f"pivot {pivot:.3e} at column {j}")
        L[j, j] = np.sqrt(pivot)
        if j + 1 < m:
            L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns)."""

    values: np.ndarray
    vectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint (p, q) index pairs covering every p < q once per sweep."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = []
        for k in range(size // 2):
            i, j = players[k], players[size - 1 - k]
            if i >= 0 and j >= 0:
                pairs.append((min(i, j), max(i, j)))
        p, q = zip(*pairs)
        rounds.append((np.array(p), np.array(q)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _sign_normalize(vectors: np.ndarray) -> np.ndarray:
    vectors = vectors.copy()
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            vectors[:, j] = -col
    return vectors


def eigen_sym(a, tol: float = 1e-15, max_sweeps: int = 60) -> EigenDecomposition:
    """Symmetric eigendecomposition by cyclic Jacobi rotations.

    Rotations are applied in round-robin order, one round of disjoint pairs
    at a time.  Eigenvalues come back in descending order and each
    eigenvector column has its first nonzero component positive.  Sweeps
    stop once every off-diagonal entry is at most ``tol * max|a|``.
    """
    a = as_sym_matrix(a).copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.max(np.abs(a)))
    sweeps = 0
    if n > 1 and scale > 0.0:
        target = tol * scale
        accept = max(1e-12, tol) * scale
        rounds = _round_robin(n)
        off_mask = ~np.eye(n, dtype=bool)
        prev_off = np.inf
        while True:
            off = float(np.max(np.abs(a[off_mask])))
            if off <= target:
                break
            if sweeps >= max_sweeps or (sweeps > 4 and off >= prev_off):
                # rounding floor reached; accept if already tiny
                if off <= accept:
                    break
                raise NoConvergence(f"off-diagonal {off:.3e} after {sweeps} sweeps")
            prev_off = off
            sweeps += 1
            for p, q in rounds:
                apq = a[p, q]
                active = np.abs(apq) > 1e-300
                if not np.any(active):
                    continue
                p, q, apq = p[active], q[active], apq[active]
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = 0.0
                a[q, p] = 0.0
                v = v @ rot
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return EigenDecomposition(values[order], _sign_normalize(v[:, order]), sweeps)


def chi_square(rng: RngStream, dof: int) -> float:
    """Chi-square(dof) variate as a sum of squared standard normals."""
    z = standard_normal(rng, dof)
    return float(np.dot(z, z))


def sample_wishart(rng: RngStream, dim: int, dof: int) -> np.ndarray:
    """Wishart(identity, dof) draw by the Bartlett decomposition.

    With A lower triangular, A[i, i] = sqrt(chi2(dof - i)) and standard
    normal entries below the diagonal, W = A A^T has mean dof * I.
    """
    dim, dof = int(dim), int(dof)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if dof < dim:
        raise DofTooSmall(f"dof={dof} < dim={dim}")
    A = np.zeros((dim, dim))
    for i in range(dim):
        A[i, i] = np.sqrt(chi_square(rng, dof - i))
        if i:
            A[i, :i] = standard_normal(rng, i)
    W = A @ A.T
    return 0.5 * (W + W.T)
