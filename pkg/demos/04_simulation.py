"""A small noisy-variable simulation.

Four groups separated on the signal columns, plus standard-normal noise
columns.  Compare VSCC with a plain BIC-selected mixture on all variables.
The full-size study (30 + 15 columns, 25 replicates) is the acceptance test
for criterion 5; this demo keeps the runtime to a minute or so.
"""

import sys

from vscc.gmm import FitConfig
from vscc.simgen import SimSpec, clustering_pipeline, replicate_study

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 5
spec = SimSpec(G=4, n_per_group=(60, 80), p_signal=6, p_noise=6, separation=0.5, seed=1)
cfg = FitConfig(g_range=(1, 6))


def progress(rep, out):
    v = out["vscc"]
    print(f"rep {rep}: kept {v.n_vars} vars ({v.relationship}), "
          f"{sum(j >= spec.p_signal for j in v.var_indices)} of them noise")


study = replicate_study(spec, reps, clustering_pipeline(cfg), progress)
print()
print(study.table())
print(f"({study.note})")
