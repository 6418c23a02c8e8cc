"""Similar/dissimilar pair selection and relative comparison construction.

Pairs are unordered and encoded as (a, b) index positions, a < b, into an
explicit candidate ordering (the caller decides what the candidates are;
during cross-validation they are the training rows). Four generators are
provided: class labels, raw parent-sharing adjacency, ranked link
strength, and proportion mixing of the label and link-strength sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    EmptyConstraintSetError,
    EmptySourceError,
    GraphCompleteError,
    GraphEmptyError,
    NoLabelsError,
    NotEnoughEntitiesError,
    SingleClassError,
)
from .linkstrength import LinkStrengthParams, LinkStrengthTable, link_strength

__all__ = [
    "Provenance",
    "PairConstraintSet",
    "RelativeTripleSet",
    "ConstraintBudget",
    "sample_distinct_pairs",
    "select_link_strength_constraints",
    "label_constraints",
    "relative_link_constraints",
    "mix_constraints",
    "build_relative_triples",
    "neighbour_graph_constraints",
    "write_comparisons",
]


class Provenance(Enum):
    """How a constraint set was generated."""

    LABEL = "label"
    RELATIVE_LINK = "relative-link"
    LINK_STRENGTH = "link-strength"
    MIXED = "mixed"


@dataclass(frozen=True)
class PairConstraintSet:
    """Disjoint similar (S) and dissimilar (D) unordered index pairs."""

    similar: tuple
    dissimilar: tuple
    provenance: Provenance

    def __post_init__(self):
        def canon(pairs, side):
            out = []
            seen = set()
            for a, b in pairs:
                if a == b:
                    raise ValueError(f"self-pair ({a}, {a}) in {side} set")
                key = (int(a), int(b)) if a < b else (int(b), int(a))
                if key in seen:
                    raise ValueError(f"duplicate pair {key} in {side} set")
                seen.add(key)
                out.append(key)
            return tuple(out), seen

        sim, sim_keys = canon(self.similar, "similar")
        dis, dis_keys = canon(self.dissimilar, "dissimilar")
        overlap = sim_keys & dis_keys
        if overlap:
            raise ValueError(f"pairs in both S and D: {sorted(overlap)[:5]}")
        object.__setattr__(self, "similar", sim)
        object.__setattr__(self, "dissimilar", dis)

    def __len__(self) -> int:
        return len(self.similar) + len(self.dissimilar)


@dataclass(frozen=True)
class RelativeTripleSet:
    """Relative comparisons d(a, b) <= d(c, d), one 4-tuple per entry.

    The anchored triple "i closer to j than to k" is the special case
    (i, j, i, k); the triples property lists entries of that shape as
    (i, j, k).
    """

    entries: tuple

    def __post_init__(self):
        norm = []
        for a, b, c, d in self.entries:
            if a == b or c == d:
                raise ValueError(f"degenerate comparison ({a},{b},{c},{d})")
            norm.append((int(a), int(b), int(c), int(d)))
        object.__setattr__(self, "entries", tuple(norm))

    @property
    def triples(self) -> tuple:
        return tuple((a, b, d) for a, b, c, d in self.entries if a == c)

    def __len__(self) -> int:
        return len(self.entries)

    def as_arrays(self):
        e = np.array(self.entries, dtype=np.int64).reshape(len(self.entries), 4)
        return e[:, 0], e[:, 1], e[:, 2], e[:, 3]


@dataclass(frozen=True)
class ConstraintBudget:
    """Number of pairs to sample and the seed controlling the sampling."""

    n_max: int
    seed: int = 0

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError(f"n_max must be >= 2, got {self.n_max}")


def _all_pairs(n: int):
    return np.triu_indices(n, k=1)


def sample_distinct_pairs(n_entities: int, n_pairs: int, rng: np.random.Generator):
    """n_pairs distinct unordered index pairs, uniform without replacement.

    Returns (a, b) arrays with a < b, in sampling order. Capped at the
    number of existing pairs.
    """
    if n_entities < 2:
        raise NotEnoughEntitiesError(
            f"need at least 2 entities to form pairs, got {n_entities}"
        )
    ii, jj = _all_pairs(n_entities)
    total = len(ii)
    take = min(n_pairs, total)
    codes = rng.choice(total, size=take, replace=False)
    return ii[codes], jj[codes]


def _greedy_split(values):
    """Selection core: repeatedly move the strongest remaining pair to S and
    the weakest remaining pair to D until fewer than two pairs remain; an
    odd leftover pair is discarded.

    Ties: argmax takes the smallest pair id, argmin the largest, which makes
    the loop equivalent to sorting by (descending value, ascending id) and
    splitting in half.
    """
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    alive = np.ones(n, dtype=bool)
    s_idx, d_idx = [], []
    remaining = n
    while remaining >= 2:
        strongest = np.where(alive, values, -np.inf)
        t = int(np.argmax(strongest))
        alive[t] = False
        s_idx.append(t)
        weakest = np.where(alive, values, np.inf)
        t = n - 1 - int(np.argmin(weakest[::-1]))
        alive[t] = False
        d_idx.append(t)
        remaining -= 2
    return np.array(s_idx, dtype=np.int64), np.array(d_idx, dtype=np.int64)


def select_link_strength_constraints(
    index,
    params: LinkStrengthParams,
    budget: ConstraintBudget,
    candidates=None,
    return_table: bool = False,
):
    """Rank sampled pairs by link strength; strong half -> S, weak half -> D.

    candidates is the ordered sequence of child keys constraint indices
    refer to (defaults to every child). n_max pairs are sampled without
    replacement, scored, and split so that every S pair is at least as
    strong as every D pair; |S| = |D| = floor(pool/2).

    With return_table the scored pool is returned alongside the set, in
    sampling order.
    """
    keys = tuple(candidates) if candidates is not None else index.children
    rng = np.random.default_rng(budget.seed)
    aa, bb = sample_distinct_pairs(len(keys), budget.n_max, rng)
    values = np.array(
        [link_strength(index, params, keys[a], keys[b]) for a, b in zip(aa, bb)]
    )
    s_idx, d_idx = _greedy_split(values)
    similar = tuple((int(aa[t]), int(bb[t])) for t in s_idx)
    dissimilar = tuple((int(aa[t]), int(bb[t])) for t in d_idx)
    out = PairConstraintSet(similar, dissimilar, Provenance.LINK_STRENGTH)
    if return_table:
        table = LinkStrengthTable(
            tuple(
                (int(a), int(b), float(v)) for a, b, v in zip(aa, bb, values)
            )
        )
        return out, table
    return out


def label_constraints(labels, budget: ConstraintBudget) -> PairConstraintSet:
    """Same-class pairs into S, different-class pairs into D, floor(n_max/2)
    of each, sampled uniformly without replacement."""
    if labels is None:
        raise NoLabelsError("label constraints need per-entity labels")
    labels = np.asarray(labels)
    n = len(labels)
    if n == 0:
        raise NoLabelsError("label constraints need per-entity labels")
    if len(np.unique(labels)) < 2:
        raise SingleClassError("cannot form dissimilar pairs from a single class")
    if n < 2:
        raise NotEnoughEntitiesError("need at least 2 labeled entities")
    rng = np.random.default_rng(budget.seed)
    ii, jj = _all_pairs(n)
    same = np.flatnonzero(labels[ii] == labels[jj])
    diff = np.flatnonzero(labels[ii] != labels[jj])
    half = budget.n_max // 2
    s_take = rng.choice(same, size=min(half, len(same)), replace=False) if len(same) else []
    d_take = rng.choice(diff, size=min(half, len(diff)), replace=False)
    similar = tuple((int(ii[t]), int(jj[t])) for t in s_take)
    dissimilar = tuple((int(ii[t]), int(jj[t])) for t in d_take)
    return PairConstraintSet(similar, dissimilar, Provenance.LABEL)


def relative_link_constraints(
    index, budget: ConstraintBudget, candidates=None
) -> PairConstraintSet:
    """Connected pairs (sharing >= 1 parent) into S, disconnected into D."""
    keys = tuple(candidates) if candidates is not None else index.children
    n = len(keys)
    if n < 2:
        raise NotEnoughEntitiesError("need at least 2 candidates")
    connected = index.connected_pairs(keys)
    if not connected:
        raise GraphEmptyError("no pair of candidates shares a parent")
    ii, jj = _all_pairs(n)
    conn_mask = np.zeros(len(ii), dtype=bool)
    for a, b in connected:
        # code of (a, b) in row-major upper-triangle order
        conn_mask[a * n - a * (a + 1) // 2 + (b - a - 1)] = True
    disc = np.flatnonzero(~conn_mask)
    if len(disc) == 0:
        raise GraphCompleteError("every candidate pair shares a parent")
    conn = np.flatnonzero(conn_mask)
    rng = np.random.default_rng(budget.seed)
    half = budget.n_max // 2
    s_take = rng.choice(conn, size=min(half, len(conn)), replace=False)
    d_take = rng.choice(disc, size=min(half, len(disc)), replace=False)
    similar = tuple((int(ii[t]), int(jj[t])) for t in s_take)
    dissimilar = tuple((int(ii[t]), int(jj[t])) for t in d_take)
    return PairConstraintSet(similar, dissimilar, Provenance.RELATIVE_LINK)


def mix_constraints(
    label_set: PairConstraintSet,
    ls_set: PairConstraintSet,
    proportion: float,
    seed: int = 0,
) -> PairConstraintSet:
    """Blend: ceil(proportion * size) pairs per side from the label set,
    the rest from the link-strength set.

    Proportion 1.0 returns label_set itself and 0.0 returns ls_set itself
    (exact endpoints). Duplicate pairs across sources are drawn once, and a
    pair already mixed into S is skipped when filling D, so the output can
    fall short of the target size when the sources overlap heavily.
    """
    if not 0.0 <= proportion <= 1.0:
        raise ValueError(f"proportion must be in [0, 1], got {proportion}")
    if proportion == 1.0:
        return label_set
    if proportion == 0.0:
        return ls_set
    if len(label_set) == 0 or len(ls_set) == 0:
        raise EmptySourceError("both source sets must be non-empty to mix")
    rng = np.random.default_rng(seed)

    def blend(lab_pairs, ls_pairs, exclude):
        total = min(len(lab_pairs), len(ls_pairs))
        n_lab = math.ceil(proportion * total)
        picked = []
        seen = set(exclude)
        for t in rng.permutation(len(lab_pairs)):
            if len(picked) >= n_lab:
                break
            pair = lab_pairs[t]
            if pair not in seen:
                picked.append(pair)
                seen.add(pair)
        for t in rng.permutation(len(ls_pairs)):
            if len(picked) >= total:
                break
            pair = ls_pairs[t]
            if pair not in seen:
                picked.append(pair)
                seen.add(pair)
        return picked

    similar = blend(label_set.similar, ls_set.similar, ())
    dissimilar = blend(label_set.dissimilar, ls_set.dissimilar, similar)
    return PairConstraintSet(tuple(similar), tuple(dissimilar), Provenance.MIXED)


def build_relative_triples(pairs: PairConstraintSet) -> RelativeTripleSet:
    """Relative comparisons from a pair set.

    Every (S pair, D pair) combination sharing an entity becomes an
    anchored triple (anchor, similar other, anchor, dissimilar other).
    When no combination shares an entity, the a-th similar pair is matched
    with the a-th dissimilar pair cyclically as the quadruplet
    d(similar) <= d(dissimilar).
    """
    if not pairs.similar or not pairs.dissimilar:
        raise EmptyConstraintSetError("need both similar and dissimilar pairs")
    entries = []
    for a, b in pairs.similar:
        for c, d in pairs.dissimilar:
            if a == c or a == d:
                other = d if a == c else c
                entries.append((a, b, a, other))
            elif b == c or b == d:
                other = d if b == c else c
                entries.append((b, a, b, other))
    if not entries:
        n = max(len(pairs.similar), len(pairs.dissimilar))
        for t in range(n):
            a, b = pairs.similar[t % len(pairs.similar)]
            c, d = pairs.dissimilar[t % len(pairs.dissimilar)]
            entries.append((a, b, c, d))
    return RelativeTripleSet(tuple(entries))


def neighbour_graph_constraints(
    index, features, budget: ConstraintBudget, candidates=None
) -> RelativeTripleSet:
    """Experimental: adjacency-preservation comparisons.

    For each candidate with both connected and disconnected peers, every
    disconnected peer must sit farther (in the input feature space) than
    the farthest connected neighbour: d(i, far_i) <= d(i, j). Samples
    n_max such quadruplets.
    """
    keys = tuple(candidates) if candidates is not None else index.children
    X = np.asarray(features, dtype=np.float64)
    n = len(keys)
    if X.shape[0] != n:
        raise ValueError("features must have one row per candidate")
    connected = index.connected_pairs(keys)
    if not connected:
        raise GraphEmptyError("no pair of candidates shares a parent")
    neighbours = [[] for _ in range(n)]
    for a, b in connected:
        neighbours[a].append(b)
        neighbours[b].append(a)
    entries = []
    for i in range(n):
        if not neighbours[i] or len(neighbours[i]) == n - 1:
            continue
        nb = np.array(neighbours[i])
        d2 = np.einsum("ij,ij->i", X[nb] - X[i], X[nb] - X[i])
        far = int(nb[np.argmax(d2)])
        linked = set(neighbours[i])
        for j in range(n):
            if j != i and j not in linked:
                entries.append((i, far, i, j))
    if not entries:
        raise GraphCompleteError("no disconnected peer available for any candidate")
    rng = np.random.default_rng(budget.seed)
    if len(entries) > budget.n_max:
        take = rng.choice(len(entries), size=budget.n_max, replace=False)
        entries = [entries[t] for t in take]
    return RelativeTripleSet(tuple(entries))


def write_comparisons(triples: RelativeTripleSet, path: str) -> None:
    """Plain-text export: one "i j k" (anchored) or "i j k l" line per
    comparison, for external tools."""
    with open(path, "w", encoding="utf-8") as fh:
        for a, b, c, d in triples.entries:
            if a == c:
                fh.write(f"{a} {b} {d}\n")
            else:
                fh.write(f"{a} {b} {c} {d}\n")
