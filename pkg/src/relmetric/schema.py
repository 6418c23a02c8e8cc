"""Relational data model: entity tables, one association table, and the
common-parent index over the bipartite reference graph.

All containers are immutable after construction (feature arrays are marked
read-only) and safe to share across concurrent readers; index lookups are
pure functions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .errors import (
    DanglingForeignKeyError,
    DuplicateEntityIdError,
    UnknownEntityError,
)

log = logging.getLogger(__name__)


class AttributeKind(Enum):
    """Role of an attribute column: real-valued or categorical."""

    NUMERICAL = "numerical"
    CATEGORICAL = "categorical"


def _readonly(a: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(a)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EntityTable:
    """One entity table: unique keys, a feature row per key, optional labels.

    Categorical entity attributes are one-hot encoded by the loader, so
    ``features`` is always a real (n, d) matrix. ``labels``, when present,
    holds one integer class code per entity; ``label_values`` maps codes
    back to the original label values (codes are assigned in sorted value
    order).
    """

    name: str
    ids: tuple[str, ...]
    features: np.ndarray
    feature_names: tuple[str, ...] = ()
    labels: np.ndarray | None = None
    label_values: tuple[str, ...] = ()

    def __post_init__(self):
        feats = _readonly(np.asarray(self.features, dtype=np.float64))
        if feats.ndim != 2:
            raise ValueError(f"features of {self.name!r} must be 2-D")
        if feats.shape[0] != len(self.ids):
            raise ValueError(
                f"{self.name!r}: {len(self.ids)} ids but {feats.shape[0]} feature rows"
            )
        if feats.shape[1] < 1:
            raise ValueError(f"{self.name!r}: entity tables need at least one feature")
        object.__setattr__(self, "features", feats)
        if self.feature_names and len(self.feature_names) != feats.shape[1]:
            raise ValueError(f"{self.name!r}: feature_names length mismatch")
        if self.labels is not None:
            lab = _readonly(np.asarray(self.labels, dtype=np.int64))
            if lab.shape != (len(self.ids),):
                raise ValueError(f"{self.name!r}: need exactly one label per entity")
            object.__setattr__(self, "labels", lab)
        pos = {}
        for i, key in enumerate(self.ids):
            if key in pos:
                raise DuplicateEntityIdError(
                    f"duplicate id {key!r} in entity table {self.name!r}"
                )
            pos[key] = i
        object.__setattr__(self, "_pos", pos)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def index_of(self, key: str) -> int:
        try:
            return self._pos[key]
        except KeyError:
            raise UnknownEntityError(f"{key!r} not in entity table {self.name!r}") from None

    def id_of(self, index: int) -> str:
        return self.ids[index]

    def __contains__(self, key: str) -> bool:
        return key in self._pos


@dataclass(frozen=True)
class AssociationTable:
    """Many-to-many reference rows from a parent table to a child table.

    Each row carries the reference's own attributes: ``numeric`` holds the
    alpha real-valued columns (NaN marks a missing value), ``categorical``
    the beta string-valued columns (None marks a missing value).
    """

    parent_table: str
    child_table: str
    parent_ids: tuple[str, ...]
    child_ids: tuple[str, ...]
    numeric: np.ndarray
    categorical: tuple[tuple, ...]
    numeric_attrs: tuple[str, ...] = ()
    categorical_attrs: tuple[str, ...] = ()

    def __post_init__(self):
        n_rows = len(self.parent_ids)
        if len(self.child_ids) != n_rows:
            raise ValueError("parent_ids and child_ids must have equal length")
        num = np.asarray(self.numeric, dtype=np.float64)
        if num.size == 0:
            num = num.reshape(n_rows, 0)
        if num.shape != (n_rows, len(self.numeric_attrs)):
            raise ValueError(
                f"numeric block must be ({n_rows}, {len(self.numeric_attrs)}), got {num.shape}"
            )
        object.__setattr__(self, "numeric", _readonly(num))
        if len(self.categorical) != n_rows:
            raise ValueError("categorical block must have one row per association row")
        for row in self.categorical:
            if len(row) != len(self.categorical_attrs):
                raise ValueError("categorical row width mismatch")
        if self.alpha + self.beta < 1:
            raise ValueError("association table needs at least one attribute")

    @property
    def n_rows(self) -> int:
        return len(self.parent_ids)

    @property
    def alpha(self) -> int:
        """Number of numeric association attributes."""
        return len(self.numeric_attrs)

    @property
    def beta(self) -> int:
        """Number of categorical association attributes."""
        return len(self.categorical_attrs)


def normalize_association_numerics(assoc: AssociationTable) -> AssociationTable:
    """Min-max scale every numeric association column into [0, 1].

    Scaling is computed over all rows of the (single) association table.
    A constant column maps to all zeros; missing values stay missing.
    The operation is idempotent.
    """
    if assoc.alpha == 0 or assoc.n_rows == 0:
        return assoc
    num = np.array(assoc.numeric, dtype=np.float64)
    with np.errstate(all="ignore"):
        lo = np.nanmin(num, axis=0)
        hi = np.nanmax(num, axis=0)
    span = hi - lo
    for m in range(num.shape[1]):
        if not np.isfinite(span[m]) or span[m] == 0.0:
            col = num[:, m]
            col[np.isfinite(col)] = 0.0
        else:
            num[:, m] = (num[:, m] - lo[m]) / span[m]
    return replace(assoc, numeric=num)


class ParentIndex:
    """Common-parent lookup over the bipartite parent/child reference graph.

    For a pair of children (i, j) the index answers: which parents hold a
    reference to both, and what are the two association rows (p -> i) and
    (p -> j). When a parent references the same child more than once, the
    first row in file order wins (a warning is logged).

    The index is immutable after construction; lookups are pure and the
    result for (i, j) is identical to the result for (j, i).
    """

    def __init__(self, child_ids, assoc: AssociationTable):
        self._child_ids = tuple(child_ids)
        self._child_pos = {c: k for k, c in enumerate(self._child_ids)}
        self._assoc = assoc
        row_of: dict[tuple, int] = {}
        parents_of: dict[str, set] = {c: set() for c in self._child_ids}
        children_of: dict[str, set] = {}
        dup = 0
        for r in range(assoc.n_rows):
            p, c = assoc.parent_ids[r], assoc.child_ids[r]
            key = (p, c)
            if key in row_of:
                dup += 1
                continue
            row_of[key] = r
            parents_of.setdefault(c, set()).add(p)
            children_of.setdefault(p, set()).add(c)
        if dup:
            log.warning(
                "association table has %d duplicate (parent, child) rows; "
                "keeping the first occurrence of each", dup,
            )
        self._row_of = row_of
        self._parents_of = {c: tuple(sorted(ps)) for c, ps in parents_of.items()}
        self._children_of = {p: tuple(sorted(cs)) for p, cs in children_of.items()}

    @property
    def children(self) -> tuple[str, ...]:
        """All child keys, in child-table order."""
        return self._child_ids

    @property
    def n_children(self) -> int:
        return len(self._child_ids)

    def parents_of(self, child: str) -> tuple[str, ...]:
        if child not in self._child_pos:
            raise UnknownEntityError(f"{child!r} is not a child entity")
        return self._parents_of.get(child, ())

    def common_parents(self, i: str, j: str) -> tuple[tuple[str, ...], int]:
        """Common parents of children i and j (sorted) and their count."""
        if i == j:
            raise ValueError("common_parents needs two distinct children")
        pi = set(self.parents_of(i))
        pj = self.parents_of(j)
        common = tuple(p for p in pj if p in pi)
        return common, len(common)

    def shares_parent(self, i: str, j: str) -> bool:
        common, count = self.common_parents(i, j)
        return count > 0

    def assoc_numeric(self, parent: str, child: str) -> np.ndarray:
        """Numeric attribute row of the reference (parent -> child)."""
        return self._assoc.numeric[self._row_of[(parent, child)]]

    def assoc_categorical(self, parent: str, child: str) -> tuple:
        return self._assoc.categorical[self._row_of[(parent, child)]]

    def has_row(self, parent: str, child: str) -> bool:
        return (parent, child) in self._row_of

    def connected_pairs(self, children=None) -> list[tuple[int, int]]:
        """All unordered pairs of the given children that share >= 1 parent.

        Returns index pairs (a, b), a < b, into the ``children`` sequence
        (defaults to all children in table order). Computed with one sparse
        product over the parent incidence matrix.
        """
        subset = self._child_ids if children is None else tuple(children)
        pos = {c: k for k, c in enumerate(subset)}
        rows, cols = [], []
        for p_i, (p, cs) in enumerate(sorted(self._children_of.items())):
            for c in cs:
                k = pos.get(c)
                if k is not None:
                    rows.append(p_i)
                    cols.append(k)
        if not rows:
            return []
        b = sp.csr_matrix(
            (np.ones(len(rows), dtype=np.int8), (rows, cols)),
            shape=(len(self._children_of), len(subset)),
        )
        g = sp.triu((b.T @ b).tocoo(), k=1).tocoo()
        pairs = sorted(zip(g.row.tolist(), g.col.tolist()))
        return [(int(a), int(b_)) for a, b_ in pairs]


@dataclass(frozen=True)
class RelationalSchema:
    """Entity tables plus the single association table linking two of them."""

    entities: dict
    association: AssociationTable
    _index: ParentIndex | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for side, table_name in (
            ("parent", self.association.parent_table),
            ("child", self.association.child_table),
        ):
            if table_name not in self.entities:
                raise ValueError(f"association {side} table {table_name!r} not declared")
        parent = self.entities[self.association.parent_table]
        child = self.entities[self.association.child_table]
        for r in range(self.association.n_rows):
            p = self.association.parent_ids[r]
            c = self.association.child_ids[r]
            if p not in parent:
                raise DanglingForeignKeyError(
                    f"association row {r}: unknown parent key {p!r}"
                )
            if c not in child:
                raise DanglingForeignKeyError(
                    f"association row {r}: unknown child key {c!r}"
                )

    @property
    def parent_table(self) -> EntityTable:
        return self.entities[self.association.parent_table]

    @property
    def child_table(self) -> EntityTable:
        """The table constraints are generated for (the association's child)."""
        return self.entities[self.association.child_table]

    def parent_index(self) -> ParentIndex:
        """Common-parent index over the association rows (built once)."""
        if self._index is None:
            object.__setattr__(
                self, "_index", ParentIndex(self.child_table.ids, self.association)
            )
        return self._index

    def normalized(self) -> "RelationalSchema":
        """Schema with the association numerics min-max scaled into [0, 1]."""
        return RelationalSchema(
            entities=self.entities,
            association=normalize_association_numerics(self.association),
        )
