"""End-to-end variable selection pipelines.

Three entry points share one shape: estimate group memberships, compute
within-group variances from them, generate up to five candidate subsets, refit
a mixture on each, and keep the candidate whose classification is least
uncertain.

* :func:`run_clustering`     - no labels; memberships come from an initial BIC fit.
* :func:`run_supervised`     - variances from the labelled rows only.
* :func:`run_semisupervised` - labelled rows plus hardened estimates for the rest.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .data_model import (
    Dataset,
    PartialPartition,
    Partition,
    Relationship,
    SoftAssignment,
    VariableSubset,
    harden,
)
from .engine import SelectionResult, select_all, within_group_variances
from .errors import (
    AllCandidatesExcluded,
    AllFitsFailed,
    DegenerateFit,
    EmptyKnownGroupError,
    InitialSolutionHasOneGroup,
    LengthMismatch,
)
from .gmm import FitConfig, FittedMixture, fit_classification, select_bic
from .preprocess import correlation_matrix, standardize


@dataclass(frozen=True)
class SubsetCandidate:
    subset: VariableSubset
    var_names: tuple[str, ...]
    fit: FittedMixture | None
    uncertainty: float
    eligible: bool = True
    reason: str = ""
    relationships: tuple[Relationship, ...] = ()
    runtime_s: float = 0.0

    @property
    def n_vars(self) -> int:
        return len(self.subset)

    @property
    def relationship(self) -> Relationship:
        return self.subset.relationship

    def sort_key(self):
        return (self.uncertainty, self.n_vars, int(self.relationship))


@dataclass
class VsccReport:
    mode: str
    chosen: SubsetCandidate
    all_candidates: list[SubsetCandidate]
    init_fit: FittedMixture | None
    selection: SelectionResult
    timings: dict[str, float]
    config: dict
    var_names: tuple[str, ...]
    unknown_mask: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    def chosen_partition(self) -> Partition:
        return harden(self.chosen.fit.assignment)

    def chosen_labels(self, rows=None) -> np.ndarray:
        labels = self.chosen_partition().labels
        return labels if rows is None else labels[rows]

    @property
    def full_set(self) -> SubsetCandidate | None:
        for c in self.all_candidates:
            if c.relationship is Relationship.FULL_SET:
                return c
        return None


def uncertainty(soft: SoftAssignment | np.ndarray) -> float:
    """Total classification uncertainty: ``n - sum_i max_g z_ig``."""
    z = soft.probs if isinstance(soft, SoftAssignment) else np.asarray(soft, dtype=float)
    if z.shape[0] == 0:
        return 0.0
    return float(z.shape[0] - z.max(axis=1).sum())


def _config_echo(cfg: FitConfig, **extra) -> dict:
    d = asdict(cfg)
    d["models"] = [m.value for m in cfg.models]
    d["g_range"] = list(cfg.g_range)
    d.update(extra)
    return d


def _compact(part: Partition) -> Partition:
    """Drop groups that received no observations, keeping label order."""
    used = np.flatnonzero(part.counts() > 0)
    remap = np.zeros(part.G + 1, dtype=np.int64)
    remap[used + 1] = np.arange(1, used.size + 1)
    return Partition(remap[part.labels], max(used.size, 1))


def _choose(candidates: list[SubsetCandidate]) -> SubsetCandidate:
    eligible = [c for c in candidates if c.eligible]
    if not eligible:
        raise AllCandidatesExcluded(
            "every candidate subset was excluded: "
            + "; ".join(f"{c.relationship.label}: {c.reason}" for c in candidates)
        )
    # least uncertainty, then fewer variables, then lower relationship order
    return min(eligible, key=SubsetCandidate.sort_key)


def _relationships_for(sel: SelectionResult, sub: VariableSubset) -> tuple[Relationship, ...]:
    key = frozenset(sub.indices)
    return tuple(r for r, s in sel.by_relationship.items() if frozenset(s.indices) == key)


def _cluster_candidate(std: Dataset, sub: VariableSubset, cfg: FitConfig, rels) -> SubsetCandidate:
    t0 = time.perf_counter()
    names = tuple(sub.names(std))
    try:
        fit = select_bic(std.select(sub.indices), cfg)
    except (AllFitsFailed, DegenerateFit) as exc:
        return SubsetCandidate(sub, names, None, float("nan"), False, f"fit failed: {exc}",
                               rels, time.perf_counter() - t0)
    unc = uncertainty(fit.assignment)
    eligible, reason = True, ""
    if fit.G == 1:
        eligible, reason = False, "refit selected G=1"
    return SubsetCandidate(sub, names, fit, unc, eligible, reason, rels, time.perf_counter() - t0)


def run_clustering(ds: Dataset, cfg: FitConfig | None = None, include_full_set: bool = True) -> VsccReport:
    cfg = cfg or FitConfig()
    timings: dict[str, float] = {}
    t_start = time.perf_counter()

    t0 = time.perf_counter()
    std = standardize(ds)
    rho = correlation_matrix(std)
    timings["standardize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    init = select_bic(std, cfg)
    timings["initial_fit"] = time.perf_counter() - t0
    if init.G == 1:
        raise InitialSolutionHasOneGroup()
    z = _compact(harden(init.assignment))
    if z.G == 1:
        raise InitialSolutionHasOneGroup(
            "the initial fit assigns every observation to one group; rerun with g_min=2"
        )

    t0 = time.perf_counter()
    w = within_group_variances(std, z)
    sel = select_all(w, rho)
    timings["selection"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    candidates = [
        _cluster_candidate(std, sub, cfg, _relationships_for(sel, sub)) for sub in sel.subsets
    ]
    timings["subset_fits"] = time.perf_counter() - t0
    if include_full_set:
        full = VariableSubset(tuple(range(std.p)), Relationship.FULL_SET)
        candidates.append(SubsetCandidate(full, std.var_names, init, uncertainty(init.assignment),
                                          True, "", (Relationship.FULL_SET,), timings["initial_fit"]))
    chosen = _choose(candidates)
    timings["total"] = time.perf_counter() - t_start
    return VsccReport("cluster", chosen, candidates, init, sel, timings,
                      _config_echo(cfg, include_full_set=include_full_set), std.var_names)


def _check_known(ds: Dataset, known: PartialPartition, min_per_group: int = 2) -> None:
    if known.n != ds.n:
        raise LengthMismatch(f"{known.n} labels for {ds.n} observations")
    counts = known.known_counts()
    for g in range(known.G):
        if counts[g] == 0:
            raise EmptyKnownGroupError(g + 1)
        if counts[g] < min_per_group:
            raise EmptyKnownGroupError(g + 1, f"has fewer than {min_per_group} labelled observations")
    if known.G < 2:
        raise EmptyKnownGroupError(2, "is missing: at least two classes must be labelled")


def _classify_candidate(std, sub, known, cfg, rels) -> SubsetCandidate:
    t0 = time.perf_counter()
    names = tuple(sub.names(std))
    try:
        fit = fit_classification(std.select(sub.indices), known, cfg)
    except (AllFitsFailed, DegenerateFit) as exc:
        return SubsetCandidate(sub, names, None, float("nan"), False, f"fit failed: {exc}",
                               rels, time.perf_counter() - t0)
    unc = uncertainty(fit.assignment.probs[known.unknown])
    return SubsetCandidate(sub, names, fit, unc, True, "", rels, time.perf_counter() - t0)


def _classification_pipeline(mode, std, rho, z_rows, z, known, cfg, include_full_set, timings,
                              full_fit=None, t_start=None) -> VsccReport:
    t0 = time.perf_counter()
    w = within_group_variances(std.take_rows(z_rows), z)
    sel = select_all(w, rho)
    timings["selection"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    candidates = [
        _classify_candidate(std, sub, known, cfg, _relationships_for(sel, sub)) for sub in sel.subsets
    ]
    timings["subset_fits"] = time.perf_counter() - t0
    if include_full_set:
        full = VariableSubset(tuple(range(std.p)), Relationship.FULL_SET)
        if full_fit is None:
            candidates.append(_classify_candidate(std, full, known, cfg, (Relationship.FULL_SET,)))
        else:
            candidates.append(SubsetCandidate(full, std.var_names, full_fit,
                                              uncertainty(full_fit.assignment.probs[known.unknown]),
                                              True, "", (Relationship.FULL_SET,),
                                              timings.get("initial_fit", 0.0)))
    chosen = _choose(candidates)
    timings["total"] = time.perf_counter() - t_start
    return VsccReport(mode, chosen, candidates, full_fit, sel, timings,
                      _config_echo(cfg, include_full_set=include_full_set), std.var_names,
                      unknown_mask=known.unknown.copy())


def run_supervised(ds: Dataset, known: PartialPartition, cfg: FitConfig | None = None,
                   include_full_set: bool = True) -> VsccReport:
    """Within-group variances from labelled rows only; classification refits on each subset.

    Uncertainty is summed over the unlabelled rows, whose responsibilities are
    the only ones the fit estimates.
    """
    cfg = cfg or FitConfig()
    t_start = time.perf_counter()
    _check_known(ds, known)
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    std = standardize(ds)
    rho = correlation_matrix(std)
    timings["standardize"] = time.perf_counter() - t0
    rows = known.known
    z = Partition(known.labels[rows], known.G)
    return _classification_pipeline("supervised", std, rho, rows, z, known, cfg,
                                    include_full_set, timings, t_start=t_start)


def run_semisupervised(ds: Dataset, known: PartialPartition, cfg: FitConfig | None = None,
                       include_full_set: bool = True) -> VsccReport:
    """Classify the unlabelled rows on all variables first, then select using every row."""
    cfg = cfg or FitConfig()
    t_start = time.perf_counter()
    _check_known(ds, known)
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    std = standardize(ds)
    rho = correlation_matrix(std)
    timings["standardize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    full_fit = fit_classification(std, known, cfg)
    timings["initial_fit"] = time.perf_counter() - t0
    estimated = harden(full_fit.assignment).labels
    combined = np.where(known.known, known.labels, estimated)
    z = Partition(combined, known.G)
    return _classification_pipeline("semisupervised", std, rho, np.ones(ds.n, dtype=bool), z, known,
                                    cfg, include_full_set, timings, full_fit=full_fit, t_start=t_start)
