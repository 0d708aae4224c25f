"""Within-group variances and the stepwise variance/correlation selection rule.

Variables are visited in ascending order of within-group variance ``W``.  The
first one is always kept; each later variable ``k`` is kept only if its
absolute correlation with every variable kept so far is strictly below
``1 - W_k**m``, where ``m`` is the order of the chosen relationship (1..5).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .data_model import Dataset, Partition, Relationship, SoftAssignment, VariableSubset
from .errors import DataError, DimensionMismatch, EmptyGroupError
from .preprocess import CorrelationMatrix


@dataclass(frozen=True)
class WithinGroupVariances:
    w: np.ndarray
    source: str  # "hard" or "soft"

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 1:
            raise DimensionMismatch("within-group variances must be a vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DataError("within-group variances must be finite and non-negative")
        if self.source not in ("hard", "soft"):
            raise DataError(f"unknown source {self.source!r}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def p(self) -> int:
        return self.w.size

    def sorted_order(self) -> np.ndarray:
        # stable sort: ties keep original column order
        return np.argsort(self.w, kind="stable")


@dataclass(frozen=True)
class SelectionResult:
    subsets: list[VariableSubset]
    w: WithinGroupVariances
    sorted_order: np.ndarray
    by_relationship: dict[Relationship, VariableSubset] = field(default_factory=dict)


def within_group_variances(ds: Dataset, z: Union[Partition, SoftAssignment]) -> WithinGroupVariances:
    """Pooled within-group variance of each column, divided by ``n``.

    ``z`` may be a hard partition (every group must be non-empty) or a soft
    assignment, in which case group means are membership-weighted.
    """
    if isinstance(z, Partition):
        if z.n != ds.n:
            raise DimensionMismatch(f"partition has {z.n} labels for {ds.n} rows")
        counts = z.counts()
        for g in range(z.G):
            if counts[g] == 0:
                raise EmptyGroupError(g + 1)
        probs = z.to_soft().probs
        source = "hard"
    elif isinstance(z, SoftAssignment):
        if z.n != ds.n:
            raise DimensionMismatch(f"assignment has {z.n} rows for {ds.n} observations")
        probs = z.probs
        source = "soft"
    else:
        raise TypeError("z must be a Partition or a SoftAssignment")

    x = ds.values
    mass = probs.sum(axis=0)
    for g in range(probs.shape[1]):
        if mass[g] <= 0:
            raise EmptyGroupError(g + 1)
    means = (probs.T @ x) / mass[:, None]  # G x p
    w = np.zeros(ds.p)
    for g in range(probs.shape[1]):
        w += probs[:, g] @ (x - means[g]) ** 2
    return WithinGroupVariances(w / ds.n, source)


def threshold(rel: Relationship, w_k: float) -> float:
    """Largest admissible absolute correlation (exclusive) for a variable with variance ``w_k``."""
    rel = Relationship(rel)
    if rel is Relationship.FULL_SET:
        raise ValueError("FULL_SET is not a selection relationship")
    return 1.0 - float(w_k) ** int(rel)


def _as_vector(w) -> np.ndarray:
    return w.w if isinstance(w, WithinGroupVariances) else np.asarray(w, dtype=float)


def _as_rho(rho) -> np.ndarray:
    return rho.rho if isinstance(rho, CorrelationMatrix) else np.asarray(rho, dtype=float)


def select_variables(w, rho, rel: Relationship) -> VariableSubset:
    wv = _as_vector(w)
    r = np.abs(_as_rho(rho))
    if r.shape != (wv.size, wv.size):
        raise DimensionMismatch("correlation matrix does not match the variance vector")
    order = np.argsort(wv, kind="stable")
    chosen = [int(order[0])]
    for k in order[1:]:
        if np.all(r[k, chosen] < threshold(rel, wv[k])):
            chosen.append(int(k))
    return VariableSubset(tuple(chosen), rel)


def select_all(w, rho) -> SelectionResult:
    """Run the selection under all five relationships, collapsing duplicate sets.

    A duplicated index set keeps the tag of the lowest-order relationship that
    produced it.
    """
    if not isinstance(w, WithinGroupVariances):
        w = WithinGroupVariances(np.asarray(w, dtype=float), "hard")
    unique: list[VariableSubset] = []
    seen: set[frozenset[int]] = set()
    by_rel: dict[Relationship, VariableSubset] = {}
    for rel in Relationship.orders():
        sub = select_variables(w, rho, rel)
        by_rel[rel] = sub
        key = frozenset(sub.indices)
        if key not in seen:
            seen.add(key)
            unique.append(sub)
    return SelectionResult(unique, w, w.sorted_order(), by_rel)
