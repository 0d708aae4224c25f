"""The selection rule on three variables, step by step.

Variable 1 has tiny within-group variance, variable 2 is noisy (W=0.6) and
variable 3 is in between (W=0.2).  Variable 1 correlates 0.75 with both
others; variables 2 and 3 correlate 0.5.
"""

import numpy as np

from vscc.data_model import Relationship
from vscc.engine import select_all, threshold

w = np.array([0.05, 0.6, 0.2])
rho = np.array([[1.0, 0.75, 0.75],
                [0.75, 1.0, 0.5],
                [0.75, 0.5, 1.0]])

print("visiting order (ascending W):", [f"v{j + 1}" for j in np.argsort(w, kind="stable")])
print()
print(f"{'relationship':12s} {'thr(v3)':>8s} {'thr(v2)':>8s}   selected")
res = select_all(w, rho)
for rel, sub in res.by_relationship.items():
    t3, t2 = threshold(rel, w[2]), threshold(rel, w[1])
    print(f"{rel.label:12s} {t3:8.3f} {t2:8.3f}   {[f'v{j + 1}' for j in sub.indices]}")

# Under Linear, v3 enters (0.75 < 0.8) and v2 is blocked by v1 (0.75 >= 0.4).
# From Cubic on, 1 - 0.6^m = 0.784 passes 0.75 and v2 joins as well.
print()
print("distinct candidate subsets:", [(s.relationship.label, s.indices) for s in res.subsets])
assert res.by_relationship[Relationship.LINEAR].indices == (0, 2)
