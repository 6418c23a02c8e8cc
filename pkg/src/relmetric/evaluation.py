"""k-NN evaluation of learned metrics under shuffled k-fold cross-validation.

Per fold and constraint budget, constraints are generated from the
training rows only, a metric is fit, and accuracy is measured on the
held-out rows. Every random choice draws from a stream keyed by
(seed, purpose, fold, budget), so conditions that share a purpose (for
example the label constraints of condition Lab and of a proportion-1.0
mix) see bitwise-identical draws, and fold x budget runs are independent
of execution order.

Conditions: Euc (identity metric), Lab (label constraints), Rel
(adjacency constraints), Pro (link-strength constraints), Both (best
proportion mix over a sweep).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .constraints import (
    ConstraintBudget,
    build_relative_triples,
    label_constraints,
    mix_constraints,
    relative_link_constraints,
    select_link_strength_constraints,
)
from .errors import (
    FoldTooSmallError,
    GraphCompleteError,
    GraphEmptyError,
    NoLabelsError,
    TooFewTrainingPointsError,
)
from .itml import ItmlConfig, itml_fit
from .linkstrength import params_for
from .lsml import LsmlConfig, lsml_fit
from .metric import (
    MahalanobisMetric,
    estimate_thresholds,
    identity_metric,
    pairwise_squared_distances,
)
from .schema import RelationalSchema

__all__ = [
    "EvalConfig",
    "ExperimentResult",
    "RecordingParentIndex",
    "knn_predict",
    "knn_predict_batch",
    "make_folds",
    "cross_validate",
    "proportion_sweep",
    "DEFAULT_PROPORTIONS",
    "CONDITIONS",
]

# purpose tags of the named sub-streams hanging off the experiment seed
TAG_FOLDS = 0
TAG_LAB = 1
TAG_REL = 2
TAG_LS = 3
TAG_MIX = 4
TAG_THRESH = 5

CONDITIONS = ("Euc", "Lab", "Rel", "Pro", "Both")
DEFAULT_PROPORTIONS = (1.0, 0.8, 0.6, 0.4, 0.2, 0.0)

_CONDITION_ALIASES = {
    "euc": "Euc",
    "lab": "Lab",
    "rel": "Rel",
    "ls": "Pro",
    "pro": "Pro",
    "both": "Both",
}


def _stream_seed(*entropy: int) -> int:
    return int(np.random.SeedSequence(list(entropy)).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class EvalConfig:
    k_neighbors: int = 5
    folds: int = 3
    seed: int = 0
    constraint_budgets: tuple = (100, 200, 300, 400, 500)

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be at least 1")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        if not self.constraint_budgets:
            raise ValueError("need at least one constraint budget")
        budgets = tuple(int(b) for b in self.constraint_budgets)
        if min(budgets) < 2:
            raise ValueError(f"constraint budgets must be >= 2, got {budgets}")
        object.__setattr__(self, "constraint_budgets", budgets)


@dataclass(frozen=True)
class ExperimentResult:
    """Accuracy of one condition: mean and std in percent over every
    fold x budget cell, plus the raw per-cell grid they derive from."""

    condition: str
    learner: str
    accuracy_mean: float
    accuracy_std: float
    per_fold: tuple  # per_fold[f][b]: accuracy of fold f at budget index b
    budgets: tuple
    seed: int
    proportion: float | None = None
    flags: tuple = ()

    @classmethod
    def from_grid(
        cls, condition, learner, grid, budgets, seed, proportion=None, flags=()
    ) -> "ExperimentResult":
        grid = np.asarray(grid, dtype=np.float64)
        return cls(
            condition=condition,
            learner=learner,
            accuracy_mean=float(grid.mean()),
            accuracy_std=float(grid.std()),
            per_fold=tuple(tuple(float(v) for v in row) for row in grid),
            budgets=tuple(int(b) for b in budgets),
            seed=seed,
            proportion=proportion,
            flags=tuple(flags),
        )

    @property
    def per_budget(self) -> tuple:
        """Mean accuracy per constraint budget (averaged over folds)."""
        grid = np.asarray(self.per_fold)
        return tuple(float(v) for v in grid.mean(axis=0))


class RecordingParentIndex:
    """ParentIndex wrapper that records every child key a lookup touches.

    Used to assert that constraint generation during cross-validation
    reads training entities only.
    """

    def __init__(self, inner):
        self.inner = inner
        self.touched: set = set()

    @property
    def children(self):
        return self.inner.children

    def parents_of(self, child):
        self.touched.add(child)
        return self.inner.parents_of(child)

    def common_parents(self, i, j):
        self.touched.update((i, j))
        return self.inner.common_parents(i, j)

    def shares_parent(self, i, j):
        self.touched.update((i, j))
        return self.inner.shares_parent(i, j)

    def assoc_numeric(self, parent, child):
        self.touched.add(child)
        return self.inner.assoc_numeric(parent, child)

    def assoc_categorical(self, parent, child):
        self.touched.add(child)
        return self.inner.assoc_categorical(parent, child)

    def has_row(self, parent, child):
        self.touched.add(child)
        return self.inner.has_row(parent, child)

    def connected_pairs(self, children=None):
        if children is not None:
            self.touched.update(children)
        return self.inner.connected_pairs(children)


def knn_predict_batch(
    metric: MahalanobisMetric, train_X, train_y, queries, k: int
) -> np.ndarray:
    """Majority vote over the k nearest training rows, one query per row.

    Distance ties resolve to the smaller training index (stable sort),
    vote ties to the smallest class id.
    """
    train_X = np.asarray(train_X, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.int64)
    queries = np.asarray(queries, dtype=np.float64)
    if train_X.shape[0] < k:
        raise TooFewTrainingPointsError(
            f"{train_X.shape[0]} training points but k={k}"
        )
    d2 = pairwise_squared_distances(metric, queries, train_X)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    votes = train_y[order]
    preds = np.empty(queries.shape[0], dtype=np.int64)
    for r in range(queries.shape[0]):
        preds[r] = int(np.argmax(np.bincount(votes[r])))
    return preds


def knn_predict(metric: MahalanobisMetric, train_X, train_y, query, k: int) -> int:
    """Single-query form of knn_predict_batch."""
    query = np.asarray(query, dtype=np.float64)
    return int(knn_predict_batch(metric, train_X, train_y, query[None, :], k)[0])


def make_folds(n: int, folds: int, rng: np.random.Generator):
    """Shuffled fold split: a permutation of range(n) cut into `folds`
    nearly equal test-index arrays."""
    perm = rng.permutation(n)
    return np.array_split(perm, folds)


def _fit_metric(learner, X_tr, pairs, u, l):
    if learner == "itml":
        return itml_fit(X_tr, pairs, ItmlConfig(u=u, l=l))
    if learner == "lsml":
        triples = build_relative_triples(pairs)
        return lsml_fit(X_tr, triples, LsmlConfig())
    raise ValueError(f"unknown learner {learner!r} (expected 'itml' or 'lsml')")


def cross_validate(
    schema: RelationalSchema,
    condition: str,
    learner: str = "itml",
    config: EvalConfig | None = None,
    proportion: float | None = None,
    audit: list | None = None,
) -> ExperimentResult:
    """Accuracy of one condition under shuffled k-fold cross-validation.

    `proportion` applies only to mixed constraint generation (condition
    "mixed"); `audit`, when a list, collects one record per relational
    constraint generation with the touched and allowed child-key sets.
    """
    config = config or EvalConfig()
    cond = _CONDITION_ALIASES.get(condition.lower(), condition)
    if cond == "Mixed" or condition.lower() == "mixed":
        cond = "Mixed"
        if proportion is None:
            raise ValueError("condition 'mixed' needs a proportion")
    elif cond not in CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}")

    if cond == "Both":
        rows = proportion_sweep(schema, learner, DEFAULT_PROPORTIONS, config)
        best = max(rows, key=lambda r: r.accuracy_mean)
        return replace(best, condition="Both", flags=best.flags + ("best-of-sweep",))

    child = schema.child_table
    if child.labels is None:
        raise NoLabelsError(f"entity table {child.name!r} has no labels")
    X = child.features
    y = child.labels
    n = child.n
    k = config.k_neighbors
    needs_relations = cond in ("Rel", "Pro", "Mixed")
    params = params_for(schema.association) if needs_relations else None
    base_index = schema.parent_index() if needs_relations else None

    folds_rng = np.random.default_rng(np.random.SeedSequence([config.seed, TAG_FOLDS]))
    test_folds = make_folds(n, config.folds, folds_rng)

    grid = np.zeros((config.folds, len(config.constraint_budgets)))
    flags: set = set()

    for f, test_idx in enumerate(test_folds):
        test_mask = np.zeros(n, dtype=bool)
        test_mask[test_idx] = True
        train_idx = np.flatnonzero(~test_mask)
        if len(train_idx) < k:
            raise FoldTooSmallError(
                f"fold {f}: {len(train_idx)} training points but k={k}"
            )
        X_tr, y_tr = X[train_idx], y[train_idx]
        X_te, y_te = X[test_idx], y[test_idx]
        train_keys = tuple(child.ids[t] for t in train_idx)
        euc_acc = None

        for b, n_max in enumerate(config.constraint_budgets):
            if cond == "Euc":
                if euc_acc is None:
                    pred = knn_predict_batch(identity_metric(X.shape[1]), X_tr, y_tr, X_te, k)
                    euc_acc = 100.0 * float(np.mean(pred == y_te))
                grid[f, b] = euc_acc
                continue

            index = base_index
            if needs_relations and audit is not None:
                index = RecordingParentIndex(base_index)

            metric, run_flags = _condition_metric(
                cond, learner, X_tr, y_tr, train_keys, index, params,
                config.seed, f, n_max, proportion,
            )
            flags.update(run_flags)
            if audit is not None and isinstance(index, RecordingParentIndex):
                audit.append(
                    {
                        "condition": cond,
                        "fold": f,
                        "budget": n_max,
                        "touched": frozenset(index.touched),
                        "allowed": frozenset(train_keys),
                    }
                )
            pred = knn_predict_batch(metric, X_tr, y_tr, X_te, k)
            grid[f, b] = 100.0 * float(np.mean(pred == y_te))

    label = {"Mixed": "Mixed"}.get(cond, cond)
    return ExperimentResult.from_grid(
        label, learner, grid, config.constraint_budgets, config.seed,
        proportion=proportion, flags=tuple(sorted(flags)),
    )


def _condition_metric(
    cond, learner, X_tr, y_tr, train_keys, index, params, seed, fold, n_max, proportion
):
    """Generate constraints for one fold x budget cell and fit the metric.

    Returns (metric, flags). Degenerate relational structure (no usable
    adjacency signal, or all sampled link strengths equal) falls back to
    the identity metric, flagged, so the run reports Euclidean-equivalent
    accuracy instead of fitting to noise.
    """
    flags: list = []
    thr = estimate_thresholds(X_tr, seed=_stream_seed(seed, TAG_THRESH, fold, n_max))
    if thr.degenerate:
        flags.append("degenerate-thresholds")

    def lab_pairs():
        return label_constraints(
            y_tr, ConstraintBudget(n_max, seed=_stream_seed(seed, TAG_LAB, fold, n_max))
        )

    def ls_pairs():
        pairs, table = select_link_strength_constraints(
            index,
            params,
            ConstraintBudget(n_max, seed=_stream_seed(seed, TAG_LS, fold, n_max)),
            candidates=train_keys,
            return_table=True,
        )
        values = table.values()
        if not values or max(values) == min(values):
            return None
        return pairs

    if cond == "Lab":
        pairs = lab_pairs()
    elif cond == "Rel":
        try:
            pairs = relative_link_constraints(
                index,
                ConstraintBudget(n_max, seed=_stream_seed(seed, TAG_REL, fold, n_max)),
                candidates=train_keys,
            )
        except (GraphEmptyError, GraphCompleteError):
            flags.append("degenerate-adjacency")
            return identity_metric(X_tr.shape[1]), flags
    elif cond == "Pro" or (cond == "Mixed" and proportion == 0.0):
        pairs = ls_pairs()
        if pairs is None:
            flags.append("degenerate-link-strength")
            return identity_metric(X_tr.shape[1]), flags
    elif cond == "Mixed" and proportion == 1.0:
        pairs = lab_pairs()
    elif cond == "Mixed":
        ls = ls_pairs()
        if ls is None:
            flags.append("degenerate-link-strength")
            pairs = lab_pairs()
        else:
            pairs = mix_constraints(
                lab_pairs(),
                ls,
                proportion,
                seed=_stream_seed(
                    seed, TAG_MIX, fold, n_max, int(round(proportion * 10000))
                ),
            )
    else:
        raise ValueError(f"unhandled condition {cond!r}")

    return _fit_metric(learner, X_tr, pairs, thr.u, thr.l), flags


def proportion_sweep(
    schema: RelationalSchema,
    learner: str = "itml",
    proportions: Sequence[float] = DEFAULT_PROPORTIONS,
    config: EvalConfig | None = None,
):
    """One mixed-constraint result per proportion, on shared folds and
    paired constraint streams, so rows differ only in the mix.

    The 1.0 row reproduces condition Lab and the 0.0 row condition Pro
    exactly (identical streams, identical fits).
    """
    config = config or EvalConfig()
    child = schema.child_table
    if child.labels is None:
        raise NoLabelsError(f"entity table {child.name!r} has no labels")
    return [
        cross_validate(schema, "mixed", learner, config, proportion=float(p))
        for p in proportions
    ]
