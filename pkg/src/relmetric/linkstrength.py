"""Link strength between two child entities, scored from the association
rows they share through common parents.

For children i, j with common parents p_1..p_l, each parent contributes
gamma * w + (1 - gamma) * z where

    w = sum over numeric assoc attrs of exp(-|v_m(p, i) - v_m(p, j)|)
    z = count of categorical assoc attrs with equal values on both rows

and the total is the sum over the l parents (no degree normalization).
Numeric attributes are assumed min-max normalized to [0, 1]. Pairs with
no common parent score exactly 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NoAssociationAttributesError, ParentNotCommonError
from .schema import AssociationTable, ParentIndex

__all__ = [
    "LinkStrengthParams",
    "LinkStrengthTable",
    "default_gamma",
    "params_for",
    "numeric_affinity",
    "categorical_affinity",
    "link_strength",
    "strength_breakdown",
]


def default_gamma(alpha: int, beta: int) -> float:
    """Balance weight alpha/(alpha+beta): leans toward whichever attribute
    family the association table actually has."""
    if alpha + beta < 1:
        raise NoAssociationAttributesError(
            "cannot derive gamma with no association attributes"
        )
    return alpha / (alpha + beta)


@dataclass(frozen=True)
class LinkStrengthParams:
    """Weights of the link-strength score.

    gamma in [0, 1] balances numeric affinity against categorical matches;
    alpha and beta are the numeric / categorical attribute counts.
    """

    gamma: float
    alpha: int
    beta: int

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta < 1:
            raise ValueError("need alpha >= 0, beta >= 0, alpha + beta >= 1")

    @property
    def max_per_parent(self) -> float:
        """Upper bound of one parent's contribution (all attrs present)."""
        return self.gamma * self.alpha + (1.0 - self.gamma) * self.beta


def params_for(assoc: AssociationTable, gamma: float | None = None) -> LinkStrengthParams:
    """Params for an association table; gamma defaults to alpha/(alpha+beta)."""
    if gamma is None:
        gamma = default_gamma(assoc.alpha, assoc.beta)
    return LinkStrengthParams(gamma=gamma, alpha=assoc.alpha, beta=assoc.beta)


@dataclass(frozen=True)
class LinkStrengthTable:
    """Scored unordered pairs: entries (i, j, ls) with ls >= 0.

    i and j are positions into whatever candidate ordering produced the
    table; entry order is the sampling order, which downstream selection
    uses as the pair id for tie-breaking.
    """

    entries: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        seen = set()
        for i, j, value in self.entries:
            if i == j:
                raise ValueError(f"self-pair ({i}, {i}) in link-strength table")
            if value < 0:
                raise ValueError(f"negative link strength {value} for ({i}, {j})")
            key = (i, j) if i < j else (j, i)
            if key in seen:
                raise ValueError(f"duplicate pair {key} in link-strength table")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.entries)

    def values(self) -> list[float]:
        return [v for _, _, v in self.entries]


def _require_common(index: ParentIndex, p_h: str, i: str, j: str) -> None:
    if not (index.has_row(p_h, i) and index.has_row(p_h, j)):
        raise ParentNotCommonError(
            f"{p_h!r} is not a common parent of {i!r} and {j!r}"
        )


def numeric_affinity(index: ParentIndex, p_h: str, i: str, j: str) -> float:
    """w(h,i,j): summed exp(-|difference|) over the numeric assoc attrs.

    Attributes missing on either row are skipped (absent evidence). With
    all alpha values present and normalized inputs the result lies in
    [alpha * e^-1, alpha].
    """
    _require_common(index, p_h, i, j)
    vi = index.assoc_numeric(p_h, i)
    vj = index.assoc_numeric(p_h, j)
    total = 0.0
    for m in range(len(vi)):
        a, b = vi[m], vj[m]
        if math.isfinite(a) and math.isfinite(b):
            total += math.exp(-abs(a - b))
    return total


def categorical_affinity(index: ParentIndex, p_h: str, i: str, j: str) -> float:
    """z(h,i,j): count of categorical assoc attrs equal on both rows.

    Equality is exact value equality after whitespace trimming; attributes
    missing on either row are skipped. Integer-valued, in [0, beta].
    """
    _require_common(index, p_h, i, j)
    ci = index.assoc_categorical(p_h, i)
    cj = index.assoc_categorical(p_h, j)
    count = 0
    for a, b in zip(ci, cj):
        if a is None or b is None:
            continue
        if isinstance(a, str):
            a = a.strip()
        if isinstance(b, str):
            b = b.strip()
        if a == b:
            count += 1
    return float(count)


def link_strength(index: ParentIndex, params: LinkStrengthParams, i: str, j: str) -> float:
    """Total link strength of the unordered pair (i, j).

    Sums gamma*w + (1-gamma)*z over common parents in sorted parent order,
    so the result is reproducible bitwise regardless of caller iteration
    order. Exactly 0.0 when the pair has no common parent.
    """
    common, _ = index.common_parents(i, j)
    total = 0.0
    for p_h in common:
        w = numeric_affinity(index, p_h, i, j)
        z = categorical_affinity(index, p_h, i, j)
        total += params.gamma * w + (1.0 - params.gamma) * z
    return total


def strength_breakdown(
    index: ParentIndex, params: LinkStrengthParams, i: str, j: str
) -> dict:
    """Per-parent decomposition of link_strength, for inspection tooling.

    Returns {"pair", "gamma", "count", "parents": [(p, w, z, term)...],
    "total"}; total equals link_strength(index, params, i, j) exactly
    because both iterate parents in the same sorted order.
    """
    common, count = index.common_parents(i, j)
    rows = []
    total = 0.0
    for p_h in common:
        w = numeric_affinity(index, p_h, i, j)
        z = categorical_affinity(index, p_h, i, j)
        term = params.gamma * w + (1.0 - params.gamma) * z
        total += term
        rows.append((p_h, w, z, term))
    return {
        "pair": (i, j),
        "gamma": params.gamma,
        "count": count,
        "parents": rows,
        "total": total,
    }
