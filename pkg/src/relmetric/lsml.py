"""Least-squares Mahalanobis learning from relative distance comparisons.

Given comparisons d(a, b) <= d(c, d), minimizes the squared hinge over
violated comparisons,

    sum (sqrt(d_M(a,b)) + margin - sqrt(d_M(c,d)))^2   over violations,

plus a LogDet pull toward the prior, tr(M P^-1) - logdet(M), by gradient
descent with backtracking line search. Every candidate is projected onto
the PSD cone (eigenvalue floor 1e-8, keeping the logdet finite) before its
loss is evaluated, so the accepted-loss sequence is monotone on the
feasible set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constraints import RelativeTripleSet
from .metric import MahalanobisMetric, identity_metric, project_psd

__all__ = ["LsmlConfig", "LsmlLog", "lsml_fit", "lsml_loss", "lsml_gradient"]

EIG_FLOOR = 1e-8
SQRT_GUARD = 1e-9


@dataclass(frozen=True)
class LsmlConfig:
    """Hyperparameters of the relative-comparison fit."""

    prior: MahalanobisMetric | None = None
    margin: float = 0.0
    max_iter: int = 100
    tol: float = 1e-3
    initial_step: float = 1.0
    min_step: float = 1e-10

    def __post_init__(self):
        if self.margin < 0.0:
            raise ValueError("margin must be nonnegative")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0.0 < self.min_step < self.initial_step:
            raise ValueError("need 0 < min_step < initial_step")


@dataclass
class LsmlLog:
    """Per-iteration fit trace: losses of accepted steps (index 0 is the
    prior), violation counts, and smallest eigenvalue after projection."""

    losses: list = field(default_factory=list)
    n_violated: list = field(default_factory=list)
    min_eigenvalue: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    stalled: bool = False


def _comparison_stats(M, X, a, b, c, d, margin):
    vab = X[a] - X[b]
    vcd = X[c] - X[d]
    dab = np.maximum(np.einsum("ij,jk,ik->i", vab, M, vab), 0.0)
    dcd = np.maximum(np.einsum("ij,jk,ik->i", vcd, M, vcd), 0.0)
    resid = np.sqrt(dab) + margin - np.sqrt(dcd)
    return vab, vcd, dab, dcd, resid


def lsml_loss(M, X, comparisons, margin: float, prior_inv) -> float:
    """Squared hinge over violated comparisons plus the LogDet pull.

    Evaluates M as given (no symmetrization), so entrywise finite
    differences of this function match lsml_gradient.
    """
    a, b, c, d = comparisons
    _, _, _, _, resid = _comparison_stats(M, X, a, b, c, d, margin)
    hinge = float(np.sum(np.where(resid > 0.0, resid, 0.0) ** 2))
    sign, logdet = np.linalg.slogdet(M)
    if sign <= 0:
        return np.inf
    reg = float(np.trace(M @ prior_inv)) - logdet
    return hinge + reg


def lsml_gradient(M, X, comparisons, margin: float, prior_inv) -> np.ndarray:
    """Analytic gradient of lsml_loss at M."""
    a, b, c, d = comparisons
    vab, vcd, dab, dcd, resid = _comparison_stats(M, X, a, b, c, d, margin)
    grad = prior_inv - np.linalg.inv(M)
    viol = resid > 0.0
    if np.any(viol):
        r = resid[viol]
        wab = r / np.maximum(np.sqrt(dab[viol]), SQRT_GUARD)
        wcd = r / np.maximum(np.sqrt(dcd[viol]), SQRT_GUARD)
        va = vab[viol]
        vc = vcd[viol]
        grad = grad + (va * wab[:, None]).T @ va - (vc * wcd[:, None]).T @ vc
    return grad


def lsml_fit(
    features,
    triples: RelativeTripleSet,
    config: LsmlConfig,
    return_log: bool = False,
):
    """Fit a metric to relative comparisons.

    Returns the learned MahalanobisMetric (best accepted iterate), or
    (metric, LsmlLog) with return_log. Empty comparison sets return the
    prior; a stalled line search returns the best iterate so far, flagged
    in the log.
    """
    X = np.ascontiguousarray(features, dtype=np.float64)
    n, dim = X.shape
    prior = config.prior if config.prior is not None else identity_metric(dim)
    if prior.dim != dim:
        raise ValueError(f"prior dimension {prior.dim} does not match data dimension {dim}")
    log = LsmlLog()
    if len(triples) == 0:
        return (prior, log) if return_log else prior
    comparisons = triples.as_arrays()
    for arr in comparisons:
        if arr.min() < 0 or arr.max() >= n:
            raise IndexError("comparison indices out of range for the feature matrix")

    current = project_psd(np.array(prior.m), floor=EIG_FLOOR)
    # Inverse of the floored prior, so the regularizer's gradient vanishes
    # exactly at the starting point.
    prior_inv = np.linalg.inv(current.m)
    loss = lsml_loss(current.m, X, comparisons, config.margin, prior_inv)
    log.losses.append(loss)
    log.n_violated.append(_violations(current.m, X, comparisons, config.margin))
    log.min_eigenvalue.append(float(np.linalg.eigvalsh(current.m)[0]))

    for it in range(config.max_iter):
        grad = lsml_gradient(current.m, X, comparisons, config.margin, prior_inv)
        grad = (grad + grad.T) / 2.0
        if float(np.linalg.norm(grad)) < 1e-12:
            log.converged = True
            break
        step = config.initial_step
        accepted = False
        while step >= config.min_step:
            candidate = project_psd(current.m - step * grad, floor=EIG_FLOOR)
            cand_loss = lsml_loss(candidate.m, X, comparisons, config.margin, prior_inv)
            if cand_loss < loss:
                accepted = True
                break
            step /= 2.0
        log.iterations = it + 1
        if not accepted:
            log.stalled = True
            break
        improvement = loss - cand_loss
        current, loss = candidate, cand_loss
        log.losses.append(loss)
        log.n_violated.append(_violations(current.m, X, comparisons, config.margin))
        log.min_eigenvalue.append(float(np.linalg.eigvalsh(current.m)[0]))
        if improvement < config.tol * max(abs(loss), 1.0):
            log.converged = True
            break

    return (current, log) if return_log else current


def _violations(M, X, comparisons, margin) -> int:
    a, b, c, d = comparisons
    _, _, _, _, resid = _comparison_stats(M, X, a, b, c, d, margin)
    return int(np.sum(resid > 0.0))
