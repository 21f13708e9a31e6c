"""Multicollinearity pruning: variance inflation factors and the
remove-the-worst loop.

Two dependencies are planted: an almost exact duplicate pair and a
three-variable linear relation.  The loop removes one variable at a time
(always the current worst) until every surviving VIF is at or below 10.
"""

import numpy as np

from regsel import DesignMatrix, vif, vif_prune

rng = np.random.default_rng(7)
n = 300
X = rng.standard_normal((n, 8))
X[:, 1] = X[:, 0] + 0.05 * rng.standard_normal(n)                  # near duplicate
X[:, 5] = (X[:, 4] + X[:, 6]) / np.sqrt(2) + 0.08 * rng.standard_normal(n)
y = 1.0 + X[:, 0] - X[:, 4] + rng.standard_normal(n)

design = DesignMatrix.from_arrays(X, y)

before = vif(design)
print("VIF before pruning:")
for name, value in before.values.items():
    marker = "  <-- above 10" if value > 10 else ""
    print(f"  {name}: {value:10.3f}{marker}")

pruned, report = vif_prune(design, vstar=10.0)

print("\nelimination trail (variable, VIF at removal):")
for name, value in report.trail:
    print(f"  removed {name} at VIF {value:.3f}")

print("\nVIF after pruning (all <= 10):")
for name, value in report.values.items():
    print(f"  {name}: {value:10.3f}")
print(f"\nsurviving terms: {pruned.term_names}")
