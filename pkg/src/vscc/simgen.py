"""Synthetic mixtures with signal and noise variables, and a replicate harness.

The separation knob is a surrogate of our own, not any published
separation index: group means are random points in the signal subspace,
rescaled so that the closest pair of means lies ``DISTANCE_PER_SEPARATION *
separation`` pooled standard deviations apart.  With the constant below,
``separation=0.7`` puts the closest pair exactly 4 pooled sd apart and the
distance shrinks linearly to 0 as ``separation -> 0``.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .data_model import Dataset, PartialPartition, Partition, Relationship
from .errors import InvalidSpec, VsccError
from .gmm import FitConfig, select_bic
from .metrics import adjusted_rand_index
from .data_model import harden

DISTANCE_PER_SEPARATION = 4.0 / 0.7
VARIANCE_RANGE = (0.5, 1.5)
SEPARATION_NOTE = "separation is a mean-distance surrogate, not clusterGeneration's sepVal"


@dataclass(frozen=True)
class SimSpec:
    G: int = 4
    n_per_group: tuple[int, int] = (100, 150)
    p_signal: int = 30
    p_noise: int = 15
    separation: float = 0.7
    seed: int = 0

    def __post_init__(self):
        lo, hi = (int(v) for v in self.n_per_group)
        object.__setattr__(self, "n_per_group", (lo, hi))
        if int(self.G) < 2:
            raise InvalidSpec("G must be at least 2")
        if lo < 1 or hi < lo:
            raise InvalidSpec(f"invalid group size range {self.n_per_group}")
        if int(self.p_signal) < 1:
            raise InvalidSpec("p_signal must be at least 1")
        if int(self.p_noise) < 0:
            raise InvalidSpec("p_noise must be non-negative")
        if not 0 < float(self.separation) <= 1:
            raise InvalidSpec("separation must lie in (0, 1]")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidSpec("seed must fit in 64 unsigned bits")

    @property
    def p(self) -> int:
        return self.p_signal + self.p_noise


@dataclass(frozen=True)
class SimInstance:
    dataset: Dataset
    truth: Partition
    signal_indices: frozenset[int]
    means: np.ndarray  # G x p_signal
    variances: np.ndarray  # G x p_signal
    spec: SimSpec


def generate(spec: SimSpec) -> SimInstance:
    """Draw one dataset; identical specs give bit-identical output."""
    rng = np.random.default_rng(np.random.SeedSequence(int(spec.seed)))
    G, ps, pn = spec.G, spec.p_signal, spec.p_noise
    lo, hi = spec.n_per_group
    sizes = rng.integers(lo, hi + 1, size=G)
    variances = rng.uniform(*VARIANCE_RANGE, size=(G, ps))
    raw = rng.standard_normal((G, ps))
    # every draw above is independent of `separation`, so a seed gives the same
    # geometry at every separation and only the scale changes
    diffs = raw[:, None, :] - raw[None, :, :]
    dist = np.sqrt((diffs**2).sum(-1))
    closest = dist[np.triu_indices(G, 1)].min()
    pooled_sd = math.sqrt(variances.mean())
    target = DISTANCE_PER_SEPARATION * spec.separation * pooled_sd
    means = raw * (target / closest) if closest > 0 else raw

    n = int(sizes.sum())
    labels = np.repeat(np.arange(1, G + 1), sizes)
    signal = means[labels - 1] + np.sqrt(variances[labels - 1]) * rng.standard_normal((n, ps))
    noise = rng.standard_normal((n, pn))
    values = np.hstack([signal, noise])
    names = [f"s{j + 1}" for j in range(ps)] + [f"n{j + 1}" for j in range(pn)]
    return SimInstance(Dataset(values, tuple(names)), Partition(labels, G),
                       frozenset(range(ps)), means, variances, spec)


def rep_seed(seed: int, rep: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(rep)]).generate_state(1, np.uint64)[0])


# -- replicate harness -----------------------------------------------------------


@dataclass
class RepOutcome:
    """What one pipeline arm produced on one replicate."""

    labels: np.ndarray | None
    eval_rows: np.ndarray | None = None
    n_vars: int = 0
    relationship: str = ""
    status: str = "ok"
    runtime_s: float = 0.0
    var_indices: tuple[int, ...] = ()


@dataclass
class RepRow:
    rep_index: int
    ari: float
    runtime_s: float
    n_vars_chosen: int
    relationship: str
    status: str
    var_indices: tuple[int, ...] = ()


@dataclass
class ArmSummary:
    rows: list[RepRow] = field(default_factory=list)

    @property
    def aris(self) -> np.ndarray:
        return np.array([r.ari for r in self.rows])

    @property
    def mean_ari(self) -> float:
        return float(self.aris.mean())

    @property
    def sd_ari(self) -> float:
        a = self.aris
        return float(a.std(ddof=1)) if a.size > 1 else 0.0

    @property
    def mean_runtime(self) -> float:
        return float(np.mean([r.runtime_s for r in self.rows]))

    @property
    def failures(self) -> int:
        return sum(r.status != "ok" for r in self.rows)


@dataclass
class StudySummary:
    spec: SimSpec
    arms: dict[str, ArmSummary]
    note: str = SEPARATION_NOTE

    def table(self) -> str:
        lines = [f"{'':28s}" + "".join(f"{a:>12s}" for a in self.arms)]
        for label, attr in [("Mean ARI", "mean_ari"), ("SD ARI", "sd_ari"), ("Avg Runtime (sec)", "mean_runtime")]:
            lines.append(f"{label:28s}" + "".join(f"{getattr(s, attr):12.2f}" for s in self.arms.values()))
        return "\n".join(lines)

    def write_csv(self, directory, prefix: str = "simulation") -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for arm, summary in self.arms.items():
            path = directory / f"{prefix}_{arm}.csv"
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["rep_index", "ari", "runtime_s", "n_vars_chosen", "relationship", "status"])
                for r in summary.rows:
                    w.writerow([r.rep_index, f"{r.ari:.6f}", f"{r.runtime_s:.3f}", r.n_vars_chosen,
                                r.relationship, r.status])
            paths.append(path)
        return paths


Pipeline = Callable[[SimInstance, int], dict[str, RepOutcome]]


def replicate_study(spec: SimSpec, n_reps: int, pipeline: Pipeline, progress=None) -> StudySummary:
    """Run ``pipeline`` on ``n_reps`` generated datasets and aggregate ARI per arm.

    A replicate whose pipeline raises a package error is scored as ARI 0 for
    every arm, with the error class recorded as its status.
    """
    if n_reps < 1:
        raise InvalidSpec("n_reps must be at least 1")
    arms: dict[str, ArmSummary] = {}
    for rep in range(n_reps):
        seed = rep_seed(spec.seed, rep)
        inst = generate(replace(spec, seed=seed))
        t0 = time.perf_counter()
        try:
            outcomes = pipeline(inst, seed)
        except VsccError as exc:
            elapsed = time.perf_counter() - t0
            names = list(arms) or ["vscc"]
            outcomes = {a: RepOutcome(None, status=type(exc).__name__, runtime_s=elapsed) for a in names}
        for arm, out in outcomes.items():
            if out.labels is None:
                ari = 0.0
            else:
                rows = slice(None) if out.eval_rows is None else out.eval_rows
                ari = adjusted_rand_index(inst.truth.labels[rows], out.labels[rows])
            arms.setdefault(arm, ArmSummary()).rows.append(
                RepRow(rep, ari, out.runtime_s, out.n_vars, out.relationship, out.status, out.var_indices))
        if progress is not None:
            progress(rep, outcomes)
    return StudySummary(spec, arms)


# -- ready-made pipelines -----------------------------------------------------------


def baseline_pipeline(cfg: FitConfig) -> Pipeline:
    """BIC-selected mixture on every variable, no selection."""

    def run(inst: SimInstance, seed: int) -> dict[str, RepOutcome]:
        t0 = time.perf_counter()
        from .preprocess import standardize

        fit = select_bic(standardize(inst.dataset), replace(cfg, seed=seed))
        return {"full": RepOutcome(harden(fit.assignment).labels, None, inst.dataset.p,
                                   Relationship.FULL_SET.label, "ok", time.perf_counter() - t0,
                                   tuple(range(inst.dataset.p)))}

    return run


def clustering_pipeline(cfg: FitConfig, include_full_set: bool = False) -> Pipeline:
    """VSCC clustering; also reports the initial all-variable fit as arm ``full``.

    The initial fit is exactly the baseline, so reusing it gives a paired
    comparison at no extra cost.  A G=1 initial solution fails both arms.
    """
    from .workflows import run_clustering

    def run(inst: SimInstance, seed: int) -> dict[str, RepOutcome]:
        t0 = time.perf_counter()
        report = run_clustering(inst.dataset, replace(cfg, seed=seed), include_full_set)
        elapsed = time.perf_counter() - t0
        init = report.init_fit
        c = report.chosen
        return {
            "vscc": RepOutcome(report.chosen_labels(), None, c.n_vars, c.relationship.label, "ok",
                               elapsed, c.subset.indices),
            "full": RepOutcome(harden(init.assignment).labels, None, inst.dataset.p,
                               Relationship.FULL_SET.label, "ok", report.timings["initial_fit"],
                               tuple(range(inst.dataset.p))),
        }

    return run


def _label_mask(n: int, frac: float, rng: np.random.Generator, truth: Partition) -> np.ndarray:
    """Random labelled subset, stratified so every group keeps at least two labels."""
    mask = np.zeros(n, dtype=bool)
    for g in range(1, truth.G + 1):
        idx = np.flatnonzero(truth.labels == g)
        k = max(2, int(round(frac * idx.size)))
        mask[rng.choice(idx, size=min(k, idx.size), replace=False)] = True
    return mask


def classification_pipeline(cfg: FitConfig, frac_labeled: float = 0.5, mode: str = "supervised",
                            include_full_set: bool = False) -> Pipeline:
    """VSCC classification with a random labelled fraction; ARI over unlabelled rows.

    Arm ``full`` is model-based classification on every variable.
    """
    from .gmm import fit_classification
    from .preprocess import standardize
    from .workflows import run_semisupervised, run_supervised

    runner = {"supervised": run_supervised, "semisupervised": run_semisupervised}[mode]

    def run(inst: SimInstance, seed: int) -> dict[str, RepOutcome]:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
        mask = _label_mask(inst.dataset.n, frac_labeled, rng, inst.truth)
        known = PartialPartition.from_partition(inst.truth, mask)
        rcfg = replace(cfg, seed=seed)
        t0 = time.perf_counter()
        report = runner(inst.dataset, known, rcfg, include_full_set)
        elapsed = time.perf_counter() - t0
        c = report.chosen
        t1 = time.perf_counter()
        full = report.init_fit or fit_classification(standardize(inst.dataset), known, rcfg)
        full_time = time.perf_counter() - t1
        unknown = ~mask
        return {
            "vscc": RepOutcome(report.chosen_labels(), unknown, c.n_vars, c.relationship.label, "ok",
                               elapsed, c.subset.indices),
            "full": RepOutcome(harden(full.assignment).labels, unknown, inst.dataset.p,
                               Relationship.FULL_SET.label, "ok", full_time,
                               tuple(range(inst.dataset.p))),
        }

    return run
