import json
import math

import numpy as np
import pytest

from relmetric.schema import (
    AssociationTable,
    EntityTable,
    ParentIndex,
    RelationalSchema,
)

# Fixed bipartite toy graph used across modules. Children h1..h4, parents
# i1..i4; common_parents(h2, h3) = {i2, i3, i4}.
TOY_EDGES = (
    ("i1", "h1"),
    ("i1", "h2"),
    ("i2", "h1"),
    ("i2", "h2"),
    ("i2", "h3"),
    ("i2", "h4"),
    ("i3", "h2"),
    ("i3", "h3"),
    ("i3", "h4"),
    ("i4", "h2"),
    ("i4", "h3"),
)


def make_entities(child_ids, parent_ids, child_features=None, labels=None):
    child_ids = tuple(child_ids)
    parent_ids = tuple(parent_ids)
    if child_features is None:
        child_features = np.arange(len(child_ids), dtype=np.float64)[:, None]
    children = EntityTable(
        name="child",
        ids=child_ids,
        features=np.asarray(child_features, dtype=np.float64),
        labels=labels,
    )
    parents = EntityTable(
        name="parent",
        ids=parent_ids,
        features=np.zeros((len(parent_ids), 1)),
    )
    return children, parents


def make_association(
    edges,
    numeric=None,
    categorical=None,
    numeric_attrs=("score",),
    categorical_attrs=(),
    child_ids=None,
    parent_ids=None,
):
    """Build an AssociationTable (and its entity tables) from an edge list.

    numeric/categorical default to a constant 0.4 column per numeric attr
    and no categorical columns.
    """
    edges = list(edges)
    if child_ids is None:
        child_ids = tuple(sorted({c for _, c in edges}))
    if parent_ids is None:
        parent_ids = tuple(sorted({p for p, _ in edges}))
    children, parents = make_entities(child_ids, parent_ids)
    n = len(edges)
    if numeric is None:
        numeric = np.full((n, len(numeric_attrs)), 0.4)
    if categorical is None:
        categorical = [tuple() for _ in range(n)]
    assoc = AssociationTable(
        parent_table="parent",
        child_table="child",
        parent_ids=tuple(p for p, _ in edges),
        child_ids=tuple(c for _, c in edges),
        numeric=np.asarray(numeric, dtype=np.float64).reshape(n, len(numeric_attrs)),
        categorical=[tuple(row) for row in categorical],
        numeric_attrs=tuple(numeric_attrs),
        categorical_attrs=tuple(categorical_attrs),
    )
    return children, parents, assoc


def make_index(edges, **kwargs):
    children, parents, assoc = make_association(edges, **kwargs)
    return ParentIndex(children.ids, assoc)


def make_schema(edges, child_features=None, labels=None, **kwargs):
    children, parents, assoc = make_association(edges, **kwargs)
    if child_features is not None or labels is not None:
        children = EntityTable(
            name="child",
            ids=children.ids,
            features=(
                np.asarray(child_features, dtype=np.float64)
                if child_features is not None
                else children.features
            ),
            labels=labels,
        )
    return RelationalSchema(
        entities={"child": children, "parent": parents},
        association=assoc,
    )


@pytest.fixture
def toy_index():
    return make_index(TOY_EDGES)


@pytest.fixture
def manifest_dir(tmp_path):
    """Tiny on-disk dataset: 3 children with one numeric feature and a
    label, 2 parents, 4 association rows with one numeric attribute."""
    (tmp_path / "children.csv").write_text(
        "cid,size,shade,kind\n"
        "c1,1.0,dark,yes\n"
        "c2,3.0,light,no\n"
        "c3,5.0,dark,yes\n"
    )
    (tmp_path / "parents.csv").write_text(
        "pid,weight\np1,2.0\np2,4.0\n"
    )
    (tmp_path / "assoc.csv").write_text(
        "pid,cid,score,tag\n"
        "p1,c1,1.0,a\n"
        "p1,c2,3.0,b\n"
        "p2,c2,5.0,a\n"
        "p2,c3,2.0,a\n"
    )
    manifest = {
        "delimiter": ",",
        "entities": [
            {
                "name": "child",
                "file": "children.csv",
                "key": "cid",
                "numeric_features": ["size"],
                "categorical_features": ["shade"],
                "label": "kind",
            },
            {
                "name": "parent",
                "file": "parents.csv",
                "key": "pid",
                "numeric_features": ["weight"],
                "categorical_features": [],
            },
        ],
        "association": {
            "file": "assoc.csv",
            "parent": "parent",
            "parent_key": "pid",
            "child": "child",
            "child_key": "cid",
            "numeric_attrs": ["score"],
            "categorical_attrs": ["tag"],
        },
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2))
    return tmp_path


def _movielens_item_line(mid, title, year_field, flags):
    assert len(flags) == 19
    return "|".join(
        [str(mid), title, year_field, "", "http://x"] + [str(f) for f in flags]
    )


@pytest.fixture
def movielens_dir(tmp_path):
    """Miniature dataset in the u.item / u.user / u.data layout.

    Movies: m1 flags genres {1, 2}, m2 flags {2}, m3 flags {4}, m4 has no
    flags, m5 has an empty date field. Genre 2 is flagged twice, genres 1
    and 4 once each, so for m1 the more popular flagged genre is 2.
    """
    flags = {
        1: [0] * 19,
        2: [0] * 19,
        3: [0] * 19,
        4: [0] * 19,
        5: [0] * 19,
    }
    flags[1][1] = 1
    flags[1][2] = 1
    flags[2][2] = 1
    flags[3][4] = 1
    flags[5][3] = 1
    lines = [
        _movielens_item_line(1, "Alpha (1990)", "01-Jan-1990", flags[1]),
        _movielens_item_line(2, "Beta (1994)", "01-Jan-1994", flags[2]),
        _movielens_item_line(3, "Gamma (1998)", "01-Jan-1998", flags[3]),
        _movielens_item_line(4, "Delta (2000)", "01-Jan-2000", flags[4]),
        _movielens_item_line(5, "Eps", "", flags[5]),
    ]
    (tmp_path / "u.item").write_text("\n".join(lines) + "\n", encoding="latin-1")
    users = [
        "1|20|M|technician|00000",
        "2|25|F|writer|11111",
        "3|30|M|artist|22222",
        "4|35|F|engineer|33333",
        "5|40|M|doctor|44444",
        "6|45|F|lawyer|55555",
    ]
    (tmp_path / "u.user").write_text("\n".join(users) + "\n")
    ratings = [
        "1\t1\t5\t100",
        "1\t2\t3\t101",
        "2\t1\t4\t102",
        "2\t3\t1\t103",
        "3\t2\t2\t104",
        "4\t4\t5\t105",
        "5\t5\t3\t106",
        "6\t1\t2\t107",
        "6\t5\t4\t108",
    ]
    (tmp_path / "u.data").write_text("\n".join(ratings) + "\n")
    return tmp_path


# ---------------------------------------------------------------------------
# Acceptance criterion reporting. test_acceptance.py records one line per
# criterion; the terminal summary prints them after the test run.

_ACCEPTANCE_LINES = {}


def record_criterion(num: int, name: str, status: str):
    _ACCEPTANCE_LINES[num] = (name, status)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE_LINES):
        name, status = _ACCEPTANCE_LINES[num]
        terminalreporter.write_line(f"criterion {num:2d} [{status}] {name}")
