import numpy as np
import pytest

from conftest import make_schema
from oracles import knn_oracle
from relmetric.errors import (
    FoldTooSmallError,
    NoLabelsError,
    TooFewTrainingPointsError,
)
from relmetric.evaluation import (
    DEFAULT_PROPORTIONS,
    TAG_FOLDS,
    EvalConfig,
    ExperimentResult,
    cross_validate,
    knn_predict,
    knn_predict_batch,
    make_folds,
    proportion_sweep,
)
from relmetric.metric import MahalanobisMetric, identity_metric
from relmetric.synthetic import generate_synthetic

SMALL = dict(
    n_parents=20,
    n_children=60,
    n_classes=3,
    link_label_correlation=0.8,
    seed=1,
    degree_low=5,
    degree_high=11,
)
FAST = EvalConfig(k_neighbors=3, folds=3, seed=5, constraint_budgets=(20, 40))


@pytest.fixture(scope="module")
def small_schema():
    return generate_synthetic(**SMALL)


def complete_bipartite_schema(n_children=12):
    """Every child linked to both parents with one constant attribute:
    all link strengths equal and no disconnected pair exists."""
    children = tuple(f"c{t:02d}" for t in range(n_children))
    edges = [(p, c) for p in ("p1", "p2") for c in children]
    rng = np.random.default_rng(0)
    features = rng.normal(size=(n_children, 3))
    labels = np.arange(n_children) % 2
    return make_schema(
        edges, child_features=features, labels=labels, child_ids=children
    )


def test_knn_majority_vote():
    X = np.array([[0.0], [1.0], [2.0]])
    y = np.array([1, 1, 0])
    assert knn_predict(identity_metric(1), X, y, [0.5], 3) == 1


def test_knn_distance_tie_prefers_smaller_train_index():
    X = np.array([[0.0], [2.0]])
    y = np.array([7, 3])
    # both training points sit at distance 1 from the query
    assert knn_predict(identity_metric(1), X, y, [1.0], 1) == 7


def test_knn_vote_tie_prefers_smaller_class_id():
    X = np.array([[0.0], [2.0]])
    y = np.array([3, 1])
    assert knn_predict(identity_metric(1), X, y, [1.0], 2) == 1


def test_knn_too_few_training_points():
    with pytest.raises(TooFewTrainingPointsError):
        knn_predict_batch(identity_metric(1), np.zeros((2, 1)), np.zeros(2, dtype=int), np.zeros((1, 1)), 3)


def test_knn_matches_bruteforce_oracle_under_ties():
    # integer features and an integer PSD matrix make every distance exact,
    # so tie ordering is identical in both implementations
    rng = np.random.default_rng(6)
    A = rng.integers(-2, 3, size=(3, 3)).astype(np.float64)
    M = A @ A.T
    X = rng.integers(0, 4, size=(40, 3)).astype(np.float64)
    y = rng.integers(0, 3, size=40)
    Q = rng.integers(0, 4, size=(15, 3)).astype(np.float64)
    metric = MahalanobisMetric(M)
    got = knn_predict_batch(metric, X, y, Q, 5)
    want = knn_oracle(X, y, Q, 5, M=M)
    assert np.array_equal(got, want)


def test_knn_matches_oracle_euclidean():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(30, 4))
    y = rng.integers(0, 2, size=30)
    Q = rng.normal(size=(10, 4))
    got = knn_predict_batch(identity_metric(4), X, y, Q, 3)
    assert np.array_equal(got, knn_oracle(X, y, Q, 3))


def test_make_folds_partitions():
    folds = make_folds(10, 4, np.random.default_rng(0))
    assert sorted(len(f) for f in folds) == [2, 2, 3, 3]
    assert sorted(np.concatenate(folds).tolist()) == list(range(10))


def test_eval_config_validation():
    with pytest.raises(ValueError):
        EvalConfig(k_neighbors=0)
    with pytest.raises(ValueError):
        EvalConfig(folds=1)
    with pytest.raises(ValueError):
        EvalConfig(constraint_budgets=())
    with pytest.raises(ValueError):
        EvalConfig(constraint_budgets=(100, 0))


def test_result_mean_std_recompute():
    grid = [[50.0, 60.0], [70.0, 80.0], [90.0, 100.0]]
    r = ExperimentResult.from_grid("Euc", "itml", grid, (10, 20), seed=0)
    flat = np.asarray(grid)
    assert r.accuracy_mean == pytest.approx(flat.mean())
    assert r.accuracy_std == pytest.approx(flat.std())
    assert r.per_budget == (70.0, 80.0)


def test_euclidean_condition_equals_identity_knn(small_schema):
    res = cross_validate(small_schema, "euc", config=FAST)
    child = small_schema.child_table
    X, y = child.features, child.labels
    rng = np.random.default_rng(np.random.SeedSequence([FAST.seed, TAG_FOLDS]))
    folds = make_folds(child.n, FAST.folds, rng)
    for f, test_idx in enumerate(folds):
        mask = np.zeros(child.n, dtype=bool)
        mask[test_idx] = True
        tr = np.flatnonzero(~mask)
        pred = knn_predict_batch(
            identity_metric(X.shape[1]), X[tr], y[tr], X[test_idx], FAST.k_neighbors
        )
        want = 100.0 * float(np.mean(pred == y[test_idx]))
        for b in range(len(FAST.constraint_budgets)):
            assert res.per_fold[f][b] == want


def test_conditions_deterministic(small_schema):
    for cond in ("euc", "lab", "rel", "ls"):
        a = cross_validate(small_schema, cond, config=FAST)
        b = cross_validate(small_schema, cond, config=FAST)
        assert a.per_fold == b.per_fold
        assert a.flags == b.flags


def test_condition_labels(small_schema):
    assert cross_validate(small_schema, "euc", config=FAST).condition == "Euc"
    assert cross_validate(small_schema, "ls", config=FAST).condition == "Pro"
    with pytest.raises(ValueError):
        cross_validate(small_schema, "nope", config=FAST)
    with pytest.raises(ValueError):
        cross_validate(small_schema, "mixed", config=FAST)  # needs proportion


def test_lsml_learner_runs(small_schema):
    cfg = EvalConfig(k_neighbors=3, folds=3, seed=5, constraint_budgets=(20,))
    res = cross_validate(small_schema, "lab", learner="lsml", config=cfg)
    assert res.learner == "lsml"
    assert 0.0 <= res.accuracy_mean <= 100.0
    with pytest.raises(ValueError):
        cross_validate(small_schema, "lab", learner="nope", config=cfg)


def test_fold_too_small():
    schema = generate_synthetic(
        n_parents=4, n_children=6, n_classes=2, seed=0,
        degree_low=2, degree_high=4,
    )
    cfg = EvalConfig(k_neighbors=5, folds=3, constraint_budgets=(4,))
    with pytest.raises(FoldTooSmallError):
        cross_validate(schema, "euc", config=cfg)


def test_missing_labels_rejected():
    schema = complete_bipartite_schema()
    stripped = make_schema(
        [(p, c) for p in ("p1", "p2") for c in schema.child_table.ids],
        child_features=schema.child_table.features,
        labels=None,
        child_ids=schema.child_table.ids,
    )
    with pytest.raises(NoLabelsError):
        cross_validate(stripped, "euc", config=FAST)


def test_leakage_audit_touches_training_children_only(small_schema):
    for cond in ("rel", "ls"):
        audit = []
        cross_validate(small_schema, cond, config=FAST, audit=audit)
        assert len(audit) == FAST.folds * len(FAST.constraint_budgets)
        for record in audit:
            assert record["touched"] <= record["allowed"]
            assert record["allowed"] < frozenset(small_schema.child_table.ids)


def test_degenerate_link_strength_falls_back_to_euclidean():
    schema = complete_bipartite_schema()
    cfg = EvalConfig(k_neighbors=3, folds=3, seed=2, constraint_budgets=(10,))
    pro = cross_validate(schema, "ls", config=cfg)
    euc = cross_validate(schema, "euc", config=cfg)
    assert "degenerate-link-strength" in pro.flags
    assert pro.per_fold == euc.per_fold


def test_degenerate_adjacency_falls_back_to_euclidean():
    schema = complete_bipartite_schema()
    cfg = EvalConfig(k_neighbors=3, folds=3, seed=2, constraint_budgets=(10,))
    rel = cross_validate(schema, "rel", config=cfg)
    euc = cross_validate(schema, "euc", config=cfg)
    assert "degenerate-adjacency" in rel.flags
    assert rel.per_fold == euc.per_fold


def test_degenerate_thresholds_flagged():
    children = tuple(f"c{t:02d}" for t in range(12))
    edges = [(p, c) for p in ("p1", "p2") for c in children]
    schema = make_schema(
        edges,
        child_features=np.zeros((12, 2)),
        labels=np.arange(12) % 2,
        child_ids=children,
    )
    cfg = EvalConfig(k_neighbors=3, folds=3, seed=0, constraint_budgets=(8,))
    res = cross_validate(schema, "lab", config=cfg)
    assert "degenerate-thresholds" in res.flags


def test_sweep_row_per_proportion(small_schema):
    rows = proportion_sweep(small_schema, config=FAST, proportions=(1.0, 0.5, 0.0))
    assert [r.proportion for r in rows] == [1.0, 0.5, 0.0]
    assert all(r.condition == "Mixed" for r in rows)


def test_sweep_endpoints_reproduce_pure_conditions(small_schema):
    rows = proportion_sweep(small_schema, config=FAST, proportions=(1.0, 0.0))
    lab = cross_validate(small_schema, "lab", config=FAST)
    pro = cross_validate(small_schema, "ls", config=FAST)
    assert rows[0].per_fold == lab.per_fold
    assert rows[1].per_fold == pro.per_fold


def test_both_condition_is_best_of_sweep(small_schema):
    both = cross_validate(small_schema, "both", config=FAST)
    rows = proportion_sweep(small_schema, config=FAST, proportions=DEFAULT_PROPORTIONS)
    assert both.condition == "Both"
    assert "best-of-sweep" in both.flags
    assert both.accuracy_mean == max(r.accuracy_mean for r in rows)
    assert both.proportion in DEFAULT_PROPORTIONS
