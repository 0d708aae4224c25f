"""Numeric and label containers shared by the rest of the package.

Group labels are 1-based everywhere a user can see them (``1..G``); variable
(column) indices are ordinary 0-based numpy indices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DatasetValidationError, DataError, DimensionMismatch, Violation


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


class Relationship(enum.IntEnum):
    """Variance-correlation relationship; the value is the polynomial order.

    ``FULL_SET`` tags the unreduced variable set when it competes as a
    candidate and sorts after every genuine relationship.
    """

    LINEAR = 1
    QUADRATIC = 2
    CUBIC = 3
    QUARTIC = 4
    QUINTIC = 5
    FULL_SET = 6

    @property
    def label(self) -> str:
        return "FullSet" if self is Relationship.FULL_SET else self.name.capitalize()

    @classmethod
    def from_label(cls, label: str) -> "Relationship":
        key = label.strip().upper().replace("FULLSET", "FULL_SET")
        return cls[key]

    @classmethod
    def orders(cls) -> list["Relationship"]:
        return [r for r in cls if r is not cls.FULL_SET]


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray
    var_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=float)))
        object.__setattr__(self, "var_names", tuple(self.var_names))
        if self.values.ndim != 2 or self.values.shape[1] != len(self.var_names):
            raise DimensionMismatch(
                f"values have shape {self.values.shape} but {len(self.var_names)} names were given"
            )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def select(self, indices: Sequence[int]) -> "Dataset":
        idx = list(indices)
        return Dataset(self.values[:, idx], tuple(self.var_names[i] for i in idx))

    def take_rows(self, rows) -> "Dataset":
        return Dataset(self.values[rows], self.var_names)


@dataclass(frozen=True)
class Partition:
    """Hard group labels in ``1..G``. Empty groups are allowed here."""

    labels: np.ndarray
    G: int

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise DimensionMismatch("labels must be one-dimensional")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(np.equal(np.mod(labels, 1), 0)):
                raise DataError("labels must be integers")
        labels = labels.astype(np.int64)
        G = int(self.G)
        if G < 1:
            raise DataError("G must be at least 1")
        bad = (labels < 1) | (labels > G)
        if bad.any():
            raise DataError(f"label {labels[bad][0]} outside 1..{G}")
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "G", G)

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        """Relabel arbitrary hashable labels to ``1..G`` in order of first appearance."""
        codes: dict = {}
        out = np.empty(len(labels), dtype=np.int64)
        for i, lab in enumerate(labels):
            out[i] = codes.setdefault(lab, len(codes) + 1)
        return cls(out, max(len(codes), 1))

    @property
    def n(self) -> int:
        return self.labels.size

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels - 1, minlength=self.G)

    def to_soft(self) -> "SoftAssignment":
        z = np.zeros((self.n, self.G))
        z[np.arange(self.n), self.labels - 1] = 1.0
        return SoftAssignment(z)


@dataclass(frozen=True)
class PartialPartition:
    """Labels for a classification problem: 0 marks an unknown observation."""

    labels: np.ndarray
    G: int
    classes: tuple[str, ...] = ()

    def __post_init__(self):
        labels = np.asarray(self.labels).astype(np.int64)
        G = int(self.G)
        if labels.ndim != 1:
            raise DimensionMismatch("labels must be one-dimensional")
        if G < 1:
            raise DataError("G must be at least 1")
        bad = (labels < 0) | (labels > G)
        if bad.any():
            raise DataError(f"label {labels[bad][0]} outside 0..{G}")
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "G", G)

    @classmethod
    def from_partition(cls, part: Partition, known_mask) -> "PartialPartition":
        mask = np.asarray(known_mask, dtype=bool)
        return cls(np.where(mask, part.labels, 0), part.G)

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def known(self) -> np.ndarray:
        return self.labels > 0

    @property
    def unknown(self) -> np.ndarray:
        return self.labels == 0

    def known_counts(self) -> np.ndarray:
        return np.bincount(self.labels[self.known] - 1, minlength=self.G)


@dataclass(frozen=True)
class SoftAssignment:
    probs: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.probs, dtype=float)
        if z.ndim != 2 or z.shape[1] < 1:
            raise DimensionMismatch("probs must be an n x G matrix")
        if np.any(z < -1e-12) or np.any(z > 1 + 1e-12):
            raise DataError("membership probabilities must lie in [0, 1]")
        if z.shape[0] and np.max(np.abs(z.sum(axis=1) - 1.0)) > 1e-9:
            raise DataError("membership rows must sum to 1")
        object.__setattr__(self, "probs", _frozen(np.clip(z, 0.0, 1.0)))

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def G(self) -> int:
        return self.probs.shape[1]


@dataclass(frozen=True)
class VariableSubset:
    """Selected columns in the order the selection algorithm inserted them."""

    indices: tuple[int, ...]
    relationship: Relationship

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise DataError("a variable subset cannot be empty")
        if len(set(idx)) != len(idx):
            raise DataError("variable subset indices must be distinct")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "relationship", Relationship(self.relationship))

    def __len__(self) -> int:
        return len(self.indices)

    def names(self, ds: Dataset) -> list[str]:
        return [ds.var_names[i] for i in self.indices]


def validate_dataset(raw, names: Sequence[str]) -> Dataset:
    """Check a raw matrix and its column names, collecting every violation.

    Raises
    ------
    DatasetValidationError
        Listing each ``NonFiniteEntry(row, col)`` (1-based), ``DuplicateName``,
        ``TooFewRows`` and ``EmptyMatrix`` found.
    """
    try:
        values = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DatasetValidationError([Violation("NonNumeric")]) from exc
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    names = [str(s) for s in names]
    violations: list[Violation] = []
    if values.ndim != 2 or values.size == 0:
        violations.append(Violation("EmptyMatrix"))
        raise DatasetValidationError(violations)
    n, p = values.shape
    if len(names) != p:
        raise DimensionMismatch(f"{p} columns but {len(names)} names")
    if n < 2:
        violations.append(Violation("TooFewRows"))
    for r, c in np.argwhere(~np.isfinite(values)):
        violations.append(Violation("NonFiniteEntry", row=int(r) + 1, col=int(c) + 1))
    seen: set[str] = set()
    reported: set[str] = set()
    for name in names:
        if name in seen and name not in reported:
            violations.append(Violation("DuplicateName", name=name))
            reported.add(name)
        seen.add(name)
    if violations:
        raise DatasetValidationError(violations)
    return Dataset(values, tuple(names))


def harden(soft: SoftAssignment) -> Partition:
    # np.argmax returns the first maximum, i.e. the lowest group index on ties
    return Partition(np.argmax(soft.probs, axis=1) + 1, soft.G)
