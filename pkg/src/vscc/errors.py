"""Exception hierarchy.

Every error carries a ``category`` which the command-line front end maps to
an exit status: ``config`` -> 1, ``data`` -> 2, ``pipeline`` -> 3.
"""

from __future__ import annotations

from dataclasses import dataclass


class VsccError(Exception):
    category = "pipeline"


class ConfigError(VsccError, ValueError):
    category = "config"


class DataError(VsccError, ValueError):
    category = "data"


class PipelineError(VsccError, RuntimeError):
    category = "pipeline"


@dataclass(frozen=True)
class Violation:
    """One reason a raw matrix was rejected. Rows and columns are 1-based."""

    kind: str
    row: int | None = None
    col: int | None = None
    name: str | None = None

    def __str__(self) -> str:
        if self.kind == "NonFiniteEntry":
            return f"NonFiniteEntry({self.row},{self.col})"
        if self.kind == "DuplicateName":
            return f"DuplicateName({self.name!r})"
        return self.kind


class DatasetValidationError(DataError):
    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        shown = ", ".join(str(v) for v in self.violations[:10])
        more = len(self.violations) - 10
        if more > 0:
            shown += f", ... ({more} more)"
        super().__init__(f"invalid dataset: {shown}")

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


class ConstantColumnError(DataError):
    def __init__(self, col: int, name: str | None = None):
        self.col = col
        self.name = name
        label = f" ({name!r})" if name else ""
        super().__init__(f"column {col}{label} has zero variance")


class DimensionMismatch(DataError):
    pass


class EmptyGroupError(DataError):
    def __init__(self, group: int):
        self.group = group
        super().__init__(f"group {group} has no members")


class EmptyKnownGroupError(DataError):
    def __init__(self, group: int, detail: str = "has no labelled observations"):
        self.group = group
        super().__init__(f"known group {group} {detail}")


class LengthMismatch(DataError):
    pass


class TooFewObservations(DataError):
    pass


class ParseError(DataError):
    def __init__(self, line: int, col: int | None, message: str = ""):
        self.line = line
        self.col = col
        where = f"line {line}" + (f", column {col}" if col is not None else "")
        super().__init__(f"parse error at {where}: {message}".rstrip(": "))


class NonNumericColumn(DataError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"column {name!r} is not numeric")


class UnknownColumn(DataError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no column named {name!r}")


class InvalidSpec(ConfigError):
    pass


class DegenerateFit(PipelineError):
    pass


class AllFitsFailed(PipelineError):
    pass


class InitialSolutionHasOneGroup(PipelineError):
    def __init__(self, message: str | None = None):
        super().__init__(
            message
            or "the initial mixture fit selected G=1, so within-group variances "
            "cannot be computed; rerun with g_min=2 if you believe groups exist"
        )


class AllCandidatesExcluded(PipelineError):
    pass
