"""Clustering the crabs: does dropping variables help?

Five body measurements are all strongly size-driven, so the full-variable
mixture tends to split on size rather than on colour form and sex.
"""

import sys

from vscc import datasets
from vscc.data_model import harden
from vscc.gmm import FitConfig
from vscc.metrics import adjusted_rand_index
from vscc.workflows import run_clustering

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
ds, truth = datasets.load("crabs")
report = run_clustering(ds, FitConfig(seed=seed))

init = report.init_fit
print(f"initial fit on all {ds.p} variables: G={init.G} {init.model.mclust_name}")
print(f"within-group variances: " + ", ".join(f"{n}={w:.3f}" for n, w in zip(ds.var_names, report.selection.w.w)))
print()
print(f"{'candidate':10s} {'vars':28s} {'G':>2s} {'model':>5s} {'uncert.':>8s} {'ARI':>6s}")
for c in report.all_candidates:
    if c.fit is None:
        print(f"{c.relationship.label:10s} {','.join(c.var_names):28s}  -- {c.reason}")
        continue
    ari = adjusted_rand_index(truth, harden(c.fit.assignment))
    mark = "  <- chosen" if c is report.chosen else ("" if c.eligible else f"  ({c.reason})")
    print(f"{c.relationship.label:10s} {','.join(c.var_names):28s} {c.fit.G:2d} {c.fit.model.mclust_name:>5s} "
          f"{c.uncertainty:8.2f} {ari:6.3f}{mark}")
print(f"\ntotal {report.timings['total']:.1f}s")
