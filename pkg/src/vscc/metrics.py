"""Pair-counting agreement between two partitions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import Partition
from .errors import LengthMismatch


def _pairs(x):
    x = np.asarray(x, dtype=float)
    return x * (x - 1) / 2.0


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray

    @property
    def rows(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def cols(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def _labels(a) -> np.ndarray:
    return a.labels if isinstance(a, Partition) else np.asarray(a)


def contingency_table(a, b) -> ContingencyTable:
    la, lb = _labels(a), _labels(b)
    if la.shape != lb.shape:
        raise LengthMismatch(f"partitions have lengths {la.size} and {lb.size}")
    ua, ia = np.unique(la, return_inverse=True)
    ub, ib = np.unique(lb, return_inverse=True)
    counts = np.zeros((ua.size, ub.size), dtype=np.int64)
    np.add.at(counts, (ia, ib), 1)
    return ContingencyTable(counts)


def _check(a, b) -> ContingencyTable:
    table = contingency_table(a, b)
    if table.n < 2:
        raise LengthMismatch("at least two observations are needed to form a pair")
    return table


def rand_index(a, b) -> float:
    """Fraction of observation pairs on which the two partitions agree."""
    t = _check(a, b)
    total = _pairs(t.n)
    same_both = _pairs(t.counts).sum()
    same_a = _pairs(t.rows).sum()
    same_b = _pairs(t.cols).sum()
    agree = total + 2 * same_both - same_a - same_b
    return float(agree / total)


def adjusted_rand_index(a, b) -> float:
    """Hubert-Arabie adjusted Rand index.

    When both partitions put everything in a single group the adjustment is
    0/0; that case returns 1 for identical partitions and 0 otherwise.
    """
    t = _check(a, b)
    total = _pairs(t.n)
    index = _pairs(t.counts).sum()
    sa = _pairs(t.rows).sum()
    sb = _pairs(t.cols).sum()
    expected = sa * sb / total
    max_index = 0.5 * (sa + sb)
    if max_index == expected:
        return 1.0 if index == max_index else 0.0
    return float((index - expected) / (max_index - expected))
