"""Command-line front end.

    vscc --mode cluster --input wine.csv --labels cultivar --out results/

Artifacts land in ``--out``: ``report.csv`` (one row per candidate subset),
``chosen.json`` (the winning candidate plus configuration) and, when the
chosen subset has exactly two variables, ``chosen_2d.csv`` with x, y, label
triples for plotting.  Simulate mode writes per-arm replicate tables and
``summary.json`` instead.

Artifacts are staged in a temporary directory and moved into place only
after the run succeeds, so a failing run leaves ``--out`` untouched.

Exit status: 0 success, 1 configuration error, 2 data error, 3 pipeline
failure.  Errors are reported on stderr as a single ``key=value`` line.
"""

from __future__ import annotations

import argparse
import csv
import json
import shutil
import sys
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .data_model import PartialPartition, Partition
from .errors import ConfigError, VsccError
from .gmm import FitConfig
from .io import format_float, ingest_csv
from .metrics import adjusted_rand_index

REPORT_COLUMNS = ["relationship", "n_vars", "vars", "G", "model", "bic", "uncertainty", "ari",
                  "runtime_s", "status"]
VAR_SEP = ";"
EXIT_CODES = {"config": 1, "data": 2, "pipeline": 3}
MODES = ("cluster", "supervised", "semisupervised", "simulate")


@dataclass(frozen=True)
class RunConfig:
    mode: str
    out: Path
    input: Path | None = None
    labels: str | None = None
    truth: str | None = None
    g_min: int = 1
    g_max: int = 9
    seed: int = 0
    include_full_set: bool = True
    emit_plots: bool = True
    omit_runtime: bool = False
    delimiter: str = ","
    # simulate mode
    reps: int = 25
    groups: int = 4
    n_min: int = 100
    n_max: int = 150
    separation: float = 0.7
    signal: int = 30
    noise: int = 15
    frac_labeled: float = 0.5

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode != "simulate" and self.input is None:
            raise ConfigError(f"--input is required in {self.mode} mode")
        if self.mode in ("supervised", "semisupervised") and not self.labels:
            raise ConfigError(f"--labels is required in {self.mode} mode")
        if self.g_min < 1 or self.g_max < self.g_min:
            raise ConfigError(f"invalid group range {self.g_min}..{self.g_max}")
        if self.reps < 1:
            raise ConfigError("--reps must be at least 1")

    def fit_config(self) -> FitConfig:
        return FitConfig(g_range=(self.g_min, self.g_max), seed=self.seed)


@dataclass(frozen=True)
class ReportRow:
    relationship: str
    n_vars: int
    vars: tuple[str, ...]
    G: int | None
    model: str
    bic: float | None
    uncertainty: float | None
    ari: float | None
    runtime_s: float | None
    status: str


# -- report construction and (de)serialisation ---------------------------------


def _status(c, chosen) -> str:
    if c is chosen:
        return "chosen"
    if not c.eligible:
        return f"excluded: {c.reason}"
    return "candidate"


def report_rows(report, truth: np.ndarray | None = None, eval_rows=None) -> list[ReportRow]:
    """One row per candidate, in generation order, with ARI against ``truth`` if given."""
    rows = []
    for c in report.all_candidates:
        f = c.fit
        ari = None
        if truth is not None and f is not None:
            from .data_model import harden

            pred = harden(f.assignment).labels
            sel = slice(None) if eval_rows is None else eval_rows
            ari = adjusted_rand_index(truth[sel], pred[sel])
        rows.append(ReportRow(
            c.relationship.label, c.n_vars, tuple(c.var_names),
            f.G if f else None, f.model.value if f else "",
            f.bic if f else None, None if f is None else c.uncertainty, ari,
            c.runtime_s, _status(c, report.chosen),
        ))
    return rows


def _fmt(x) -> str:
    return "" if x is None else format_float(float(x))


def _row_cells(r: ReportRow, omit_runtime: bool) -> list[str]:
    return [r.relationship, str(r.n_vars), VAR_SEP.join(r.vars), "" if r.G is None else str(r.G),
            r.model, _fmt(r.bic), _fmt(r.uncertainty), _fmt(r.ari),
            "" if omit_runtime else _fmt(r.runtime_s), r.status]


def write_report(path, rows: list[ReportRow], omit_runtime: bool = False) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in rows:
            w.writerow(_row_cells(r, omit_runtime))


def read_report(path) -> list[ReportRow]:
    def num(s, cast=float):
        return None if s == "" else cast(s)

    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != REPORT_COLUMNS:
            raise ValueError(f"unexpected report header {reader.fieldnames}")
        return [ReportRow(d["relationship"], int(d["n_vars"]), tuple(d["vars"].split(VAR_SEP)),
                          num(d["G"], int), d["model"], num(d["bic"]), num(d["uncertainty"]),
                          num(d["ari"]), num(d["runtime_s"]), d["status"]) for d in reader]


def _summary(report, rows: list[ReportRow], cfg: RunConfig, omit_runtime: bool) -> dict:
    chosen = next(r for r in rows if r.status == "chosen")
    out = {
        "mode": report.mode,
        "relationship": chosen.relationship,
        "relationships": [r.label for r in report.chosen.relationships],
        "n_vars": chosen.n_vars,
        "vars": list(chosen.vars),
        "G": chosen.G,
        "model": chosen.model,
        "bic": chosen.bic,
        "uncertainty": chosen.uncertainty,
        "ari": chosen.ari,
        "initial_fit": None,
        "config": report.config,
        "input": str(cfg.input),
    }
    if report.init_fit is not None:
        out["initial_fit"] = {"G": report.init_fit.G, "model": report.init_fit.model.value,
                              "bic": report.init_fit.bic}
    if not omit_runtime:
        out["timings"] = report.timings
    return out


def _write_plot(path, report, ds) -> None:
    idx = report.chosen.subset.indices
    x = ds.values[:, idx]
    labels = report.chosen_labels()
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "label"])
        for (a, b), g in zip(x, labels):
            w.writerow([repr(float(a)), repr(float(b)), int(g)])
    # the axis names travel in a one-line sidecar so the triples stay plain
    Path(path).with_suffix(".axes").write_text(f"x={ds.var_names[idx[0]]}\ny={ds.var_names[idx[1]]}\n")


# -- modes ---------------------------------------------------------------------------


def _run_selection(cfg: RunConfig, stage: Path) -> dict:
    from . import workflows

    truth = None
    if cfg.truth:
        ds, known = ingest_csv(cfg.input, cfg.labels, cfg.delimiter, drop=[cfg.truth])
        _, t = ingest_csv(cfg.input, cfg.truth, cfg.delimiter, drop=[c for c in [cfg.labels] if c])
        truth = t.labels
    else:
        ds, known = ingest_csv(cfg.input, cfg.labels, cfg.delimiter)
    fc = cfg.fit_config()
    eval_rows = None
    if cfg.mode == "cluster":
        if known is not None:
            if truth is None and np.all(known.known):
                truth = known.labels
        report = workflows.run_clustering(ds, fc, cfg.include_full_set)
    else:
        runner = workflows.run_supervised if cfg.mode == "supervised" else workflows.run_semisupervised
        report = runner(ds, known, fc, cfg.include_full_set)
        eval_rows = known.unknown
        if truth is not None and (truth[eval_rows] == 0).any():
            truth = None
    rows = report_rows(report, truth, eval_rows)
    write_report(stage / "report.csv", rows, cfg.omit_runtime)
    summary = _summary(report, rows, cfg, cfg.omit_runtime)
    (stage / "chosen.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if cfg.emit_plots and report.chosen.n_vars == 2:
        _write_plot(stage / "chosen_2d.csv", report, ds)
    return summary


def _run_simulation(cfg: RunConfig, stage: Path) -> dict:
    from . import simgen

    spec = simgen.SimSpec(cfg.groups, (cfg.n_min, cfg.n_max), cfg.signal, cfg.noise,
                          cfg.separation, cfg.seed)
    fc = cfg.fit_config()
    pipeline = simgen.clustering_pipeline(fc, cfg.include_full_set)
    study = simgen.replicate_study(spec, cfg.reps, pipeline)
    study.write_csv(stage)
    summary = {
        "mode": "simulate",
        "spec": {"G": spec.G, "n_per_group": list(spec.n_per_group), "p_signal": spec.p_signal,
                 "p_noise": spec.p_noise, "separation": spec.separation, "seed": spec.seed},
        "note": study.note,
        "reps": cfg.reps,
        "arms": {a: {"mean_ari": s.mean_ari, "sd_ari": s.sd_ari, "failures": s.failures,
                     **({} if cfg.omit_runtime else {"mean_runtime_s": s.mean_runtime})}
                 for a, s in study.arms.items()},
    }
    (stage / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def run(cfg: RunConfig) -> dict:
    """Execute one CLI run, publishing artifacts into ``cfg.out`` only on success."""
    out = Path(cfg.out)
    parent = out.parent if out.parent.exists() else Path(tempfile.gettempdir())
    with tempfile.TemporaryDirectory(dir=parent, prefix=".vscc-") as tmp:
        stage = Path(tmp)
        summary = _run_simulation(cfg, stage) if cfg.mode == "simulate" else _run_selection(cfg, stage)
        out.mkdir(parents=True, exist_ok=True)
        for f in sorted(stage.iterdir()):
            shutil.move(str(f), out / f.name)
    return summary


# -- argument parsing ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: category=config kind=UsageError message={message}", file=sys.stderr)
        raise SystemExit(EXIT_CODES["config"])


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vscc", description="Variable selection for clustering and classification.")
    p.add_argument("--mode", choices=MODES, default="cluster")
    p.add_argument("--input", type=Path, help="header-first CSV of numeric columns")
    p.add_argument("--labels", help="label column: known classes (supervised modes) or truth for ARI (cluster)")
    p.add_argument("--truth", help="separate ground-truth column, scored on unlabelled rows")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--g-min", type=int, default=1)
    p.add_argument("--g-max", type=int, default=9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-full-set", action="store_true", help="do not let the full variable set compete")
    p.add_argument("--no-plots", action="store_true")
    p.add_argument("--omit-runtime", action="store_true",
                   help="leave runtime cells blank so reruns are byte-identical")
    p.add_argument("--out", type=Path, default=Path("vscc-out"))
    sim = p.add_argument_group("simulate mode")
    sim.add_argument("--reps", type=int, default=25)
    sim.add_argument("--groups", type=int, default=4)
    sim.add_argument("--n-min", type=int, default=100)
    sim.add_argument("--n-max", type=int, default=150)
    sim.add_argument("--separation", type=float, default=0.7)
    sim.add_argument("--signal", type=int, default=30)
    sim.add_argument("--noise", type=int, default=15)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(mode=ns.mode, out=ns.out, input=ns.input, labels=ns.labels, truth=ns.truth,
                     g_min=ns.g_min, g_max=ns.g_max, seed=ns.seed, include_full_set=not ns.no_full_set,
                     emit_plots=not ns.no_plots, omit_runtime=ns.omit_runtime, delimiter=ns.delimiter,
                     reps=ns.reps, groups=ns.groups, n_min=ns.n_min, n_max=ns.n_max,
                     separation=ns.separation, signal=ns.signal, noise=ns.noise)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        summary = run(cfg)
    except VsccError as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: category={exc.category} kind={type(exc).__name__} message={msg}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 3)
    except FileNotFoundError as exc:
        print(f"error: category=data kind=FileNotFound message={exc}", file=sys.stderr)
        return EXIT_CODES["data"]
    if summary.get("mode") == "simulate":
        for arm, s in summary["arms"].items():
            print(f"{arm}: mean ARI {s['mean_ari']:.3f} (sd {s['sd_ari']:.3f}, failures {s['failures']})")
    else:
        ari = "" if summary["ari"] is None else f", ARI {summary['ari']:.3f}"
        print(f"chosen: {summary['relationship']} {summary['n_vars']} vars [{', '.join(summary['vars'])}] "
              f"G={summary['G']} {summary['model']}, uncertainty {summary['uncertainty']:.3f}{ari}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
