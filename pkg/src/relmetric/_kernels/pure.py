"""Pure numpy implementations of the hot kernels.

These mirror the compiled versions in _native.pyx operation for operation;
the two backends must stay numerically interchangeable (the test suite
checks cross-backend agreement). Keep any change in lockstep.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def mahalanobis_cross(X: np.ndarray, Y: np.ndarray, M: np.ndarray) -> np.ndarray:
    """All squared Mahalanobis distances (x_i - y_j)^T M (x_i - y_j).

    Returns an (n, m) array, clamped at 0 to absorb rounding in the
    expansion x'Mx + y'My - 2 x'My.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    M = np.ascontiguousarray(M, dtype=np.float64)
    XM = X @ M
    xx = np.einsum("ij,ij->i", XM, X)
    YM = Y @ M
    yy = np.einsum("ij,ij->i", YM, Y)
    out = xx[:, None] + yy[None, :] - 2.0 * (XM @ Y.T)
    np.maximum(out, 0.0, out=out)
    return out


def itml_sweep(
    A: np.ndarray,
    X: np.ndarray,
    ci: np.ndarray,
    cj: np.ndarray,
    delta: np.ndarray,
    bhat: np.ndarray,
    lambdas: np.ndarray,
    slack: float,
    gamma_proj: float,
) -> tuple[float, int]:
    """One cyclic pass of rank-one threshold projections, in place.

    For constraint t between rows ci[t] and cj[t]: delta[t] = +1 caps the
    squared distance at bhat[t], delta[t] = -1 floors it. A, bhat, and
    lambdas are updated in place; returns (max |multiplier change|,
    constraints skipped for numerical reasons).
    """
    max_change = 0.0
    skipped = 0
    for t in range(len(ci)):
        v = X[ci[t]] - X[cj[t]]
        Av = A @ v
        p = float(v @ Av)
        if p < 1e-12:
            skipped += 1
            continue
        if delta[t] == 1:
            alpha = min(lambdas[t], gamma_proj * (1.0 / p - 1.0 / bhat[t]))
            denom = 1.0 - alpha * p
            if abs(denom) <= 1e-12:
                skipped += 1
                continue
            lambdas[t] -= alpha
            beta = alpha / denom
            bhat[t] = 1.0 / (1.0 / bhat[t] + alpha / slack)
        else:
            alpha = min(lambdas[t], gamma_proj * (1.0 / bhat[t] - 1.0 / p))
            denom = 1.0 + alpha * p
            if abs(denom) <= 1e-12:
                skipped += 1
                continue
            lambdas[t] -= alpha
            beta = -alpha / denom
            bhat[t] = 1.0 / (1.0 / bhat[t] - alpha / slack)
        A += beta * np.outer(Av, Av)
        change = abs(alpha)
        if change > max_change:
            max_change = change
    return max_change, skipped
