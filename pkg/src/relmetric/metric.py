"""Mahalanobis metric container and supporting linear algebra.

The squared distance is (x - y)^T M (x - y) with M symmetric positive
semi-definite. Construction enforces symmetry to 1e-9 and eigenvalues
>= -1e-8; helpers provide the L^T L factorization, PSD projection,
threshold estimation for learners, and full-precision text serialization.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import DimensionMismatchError, NonSymmetricError, NotPsdError

__all__ = [
    "MahalanobisMetric",
    "identity_metric",
    "squared_distance",
    "pairwise_squared_distances",
    "linear_projection",
    "project_psd",
    "Thresholds",
    "estimate_thresholds",
    "save_metric",
    "load_metric",
]

SYMMETRY_TOL = 1e-9
PSD_TOL = -1e-8
RANK_EPS = 1e-10


@dataclass(frozen=True)
class MahalanobisMetric:
    """Immutable d x d symmetric PSD matrix defining a squared distance."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"metric matrix must be square, got {m.shape}")
        gap = float(np.max(np.abs(m - m.T))) if m.size else 0.0
        if gap > SYMMETRY_TOL:
            raise NonSymmetricError(f"matrix asymmetry {gap:.3e} exceeds {SYMMETRY_TOL}")
        m = (m + m.T) / 2.0
        w = np.linalg.eigvalsh(m)
        if w.size and float(w[0]) < PSD_TOL:
            raise NotPsdError(f"minimum eigenvalue {w[0]:.3e} below {PSD_TOL}")
        m = np.ascontiguousarray(m)
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def dim(self) -> int:
        return self.m.shape[0]


def identity_metric(dim: int) -> MahalanobisMetric:
    """Identity matrix: squared distance reduces to squared Euclidean."""
    return MahalanobisMetric(np.eye(dim))


def squared_distance(metric: MahalanobisMetric, x, y) -> float:
    """(x - y)^T M (x - y), clamped at 0 against rounding."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != (metric.dim,) or y.shape != (metric.dim,):
        raise DimensionMismatchError(
            f"expected vectors of dimension {metric.dim}, got {x.shape} and {y.shape}"
        )
    diff = x - y
    val = float(diff @ metric.m @ diff)
    return val if val > 0.0 else 0.0


def pairwise_squared_distances(
    metric: MahalanobisMetric, X, Y=None
) -> np.ndarray:
    """Squared distances between all rows of X and Y (Y defaults to X)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    Y = X if Y is None else np.ascontiguousarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[1] != metric.dim or Y.shape[1] != metric.dim:
        raise DimensionMismatchError(
            f"expected (*, {metric.dim}) matrices, got {X.shape} and {Y.shape}"
        )
    return _kernels.mahalanobis_cross(X, Y, metric.m)


def linear_projection(metric: MahalanobisMetric) -> np.ndarray:
    """L with M = L^T L and k = rank(M) rows.

    Eigenvalues below RANK_EPS * max_eig count as zero for the rank
    decision; distances between projected points L @ x equal the metric
    distances.
    """
    w, v = np.linalg.eigh(metric.m)
    if w.size and float(w[0]) < PSD_TOL:
        raise NotPsdError(f"minimum eigenvalue {w[0]:.3e} below {PSD_TOL}")
    w = np.maximum(w, 0.0)
    cutoff = RANK_EPS * float(w[-1]) if w.size else 0.0
    keep = w > cutoff
    return np.sqrt(w[keep])[:, None] * v[:, keep].T


def project_psd(m: np.ndarray, floor: float = 0.0) -> MahalanobisMetric:
    """Nearest PSD matrix in Frobenius norm: eigenvalues clipped at floor.

    A positive floor additionally bounds the matrix away from singular,
    which keeps log-determinant terms finite for learners that need them.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {m.shape}")
    gap = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if gap > 1e-8 * scale:
        raise NonSymmetricError(f"matrix asymmetry {gap:.3e}; symmetrize before projecting")
    sym = (m + m.T) / 2.0
    w, v = np.linalg.eigh(sym)
    w = np.maximum(w, floor)
    out = (v * w) @ v.T
    return MahalanobisMetric((out + out.T) / 2.0)


class Thresholds(NamedTuple):
    """Distance thresholds for pairwise learners; degenerate marks the
    all-identical-points fallback."""

    u: float
    l: float
    degenerate: bool = False


def estimate_thresholds(
    features, sample_size: int = 1000, seed: int | np.random.Generator = 0
) -> Thresholds:
    """Percentile thresholds of squared Euclidean distance on sampled pairs.

    u is the 5th percentile, l the 95th, over sample_size random pairs of
    distinct rows. Guarantees u < l: equal percentiles are widened by
    l = 10 * u; all-identical points fall back to (0.1, 1.0), flagged.
    """
    X = np.asarray(features, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least 2 points to estimate thresholds")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    a = rng.integers(0, n, size=sample_size)
    b = rng.integers(0, n - 1, size=sample_size)
    b = np.where(b >= a, b + 1, b)
    diff = X[a] - X[b]
    d2 = np.einsum("ij,ij->i", diff, diff)
    u = float(np.percentile(d2, 5))
    l = float(np.percentile(d2, 95))
    if l <= 0.0:
        return Thresholds(0.1, 1.0, degenerate=True)
    if u <= 0.0:
        u = l * 1e-2
    if u >= l:
        l = u * 10.0
    return Thresholds(u, l, degenerate=False)


def save_metric(metric: MahalanobisMetric, path: str) -> None:
    """Text serialization: dimension line, then one row per line with
    full-precision (round-trippable) float formatting."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{metric.dim}\n")
        for row in metric.m:
            fh.write(" ".join(format(v, ".17g") for v in row))
            fh.write("\n")


def load_metric(path: str) -> MahalanobisMetric:
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    with open(path, encoding="utf-8") as fh:
        dim = int(fh.readline())
        rows = [
            [float(tok) for tok in fh.readline().split()] for _ in range(dim)
        ]
    m = np.array(rows, dtype=np.float64).reshape(dim, dim)
    return MahalanobisMetric(m)
