"""Information-theoretic Mahalanobis learning by cyclic Bregman projections.

Each similar pair (i, j) contributes the constraint d_M(i, j)^2 <= u, each
dissimilar pair d_M^2 >= l. Constraints are visited cyclically; every visit
applies a slack-moderated rank-one LogDet update to the matrix, which keeps
it positive definite by construction. The fit stops when the largest
multiplier change in a sweep drops below tol, or after max_iter sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .constraints import PairConstraintSet
from .metric import MahalanobisMetric, identity_metric

__all__ = ["ItmlConfig", "ItmlLog", "itml_fit"]


@dataclass(frozen=True)
class ItmlConfig:
    """Hyperparameters of the threshold-projection fit.

    u and l are squared-distance thresholds with 0 < u < l; slack > 0
    trades constraint satisfaction against staying near the prior
    (larger slack enforces harder). The prior defaults to the identity.
    """

    u: float
    l: float
    slack: float = 1.0
    prior: MahalanobisMetric | None = None
    max_iter: int = 1000
    tol: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.u < self.l:
            raise ValueError(f"need 0 < u < l, got u={self.u}, l={self.l}")
        if self.slack <= 0.0:
            raise ValueError("slack must be positive")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class ItmlLog:
    """Per-sweep fit trace.

    max_change[s] is the largest multiplier change in sweep s (the
    convergence statistic); skipped counts constraint visits abandoned on
    numerical grounds (degenerate pair or rank-one denominator ~ 0);
    n_satisfied[s] and min_eigenvalue[s] support the invariant checks.
    """

    sweeps: int = 0
    converged: bool = False
    skipped: int = 0
    max_change: list = field(default_factory=list)
    n_satisfied: list = field(default_factory=list)
    min_eigenvalue: list = field(default_factory=list)


def _count_satisfied(A, X, ci, cj, delta, u, l) -> int:
    diff = X[ci] - X[cj]
    d2 = np.einsum("ij,jk,ik->i", diff, A, diff)
    return int(np.sum(np.where(delta == 1, d2 <= u, d2 >= l)))


def itml_fit(
    features,
    pairs: PairConstraintSet,
    config: ItmlConfig,
    return_log: bool = False,
):
    """Fit a metric to the pairwise constraints.

    Returns the learned MahalanobisMetric, or (metric, ItmlLog) when
    return_log is set. With no constraints the prior is returned exactly.
    """
    X = np.ascontiguousarray(features, dtype=np.float64)
    n, d = X.shape
    prior = config.prior if config.prior is not None else identity_metric(d)
    if prior.dim != d:
        raise ValueError(f"prior dimension {prior.dim} does not match data dimension {d}")
    log = ItmlLog()

    n_sim = len(pairs.similar)
    n_dis = len(pairs.dissimilar)
    if n_sim + n_dis == 0:
        return (prior, log) if return_log else prior

    ci = np.empty(n_sim + n_dis, dtype=np.int64)
    cj = np.empty(n_sim + n_dis, dtype=np.int64)
    delta = np.empty(n_sim + n_dis, dtype=np.int64)
    for t, (i, j) in enumerate(pairs.similar):
        ci[t], cj[t], delta[t] = i, j, 1
    for t, (i, j) in enumerate(pairs.dissimilar):
        ci[n_sim + t], cj[n_sim + t], delta[n_sim + t] = i, j, -1
    if ci.max() >= n or ci.min() < 0 or cj.max() >= n or cj.min() < 0:
        raise IndexError("constraint indices out of range for the feature matrix")

    A = np.array(prior.m, dtype=np.float64, copy=True, order="C")
    bhat = np.where(delta == 1, config.u, config.l).astype(np.float64)
    lambdas = np.zeros(n_sim + n_dis, dtype=np.float64)
    gamma_proj = config.slack / (config.slack + 1.0)

    for sweep in range(config.max_iter):
        max_change, skipped = _kernels.itml_sweep(
            A, X, ci, cj, delta, bhat, lambdas, config.slack, gamma_proj
        )
        log.sweeps = sweep + 1
        log.skipped += int(skipped)
        if return_log:
            log.max_change.append(float(max_change))
            log.n_satisfied.append(
                _count_satisfied(A, X, ci, cj, delta, config.u, config.l)
            )
            log.min_eigenvalue.append(float(np.linalg.eigvalsh((A + A.T) / 2.0)[0]))
        if max_change < config.tol:
            log.converged = True
            break

    metric = MahalanobisMetric((A + A.T) / 2.0)
    return (metric, log) if return_log else metric
