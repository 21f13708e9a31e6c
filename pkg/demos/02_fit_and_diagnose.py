"""Ordinary least squares and influence diagnostics on a small dataset
with one deliberately planted outlier.
"""

import numpy as np

from regsel import (
    DesignMatrix,
    dffits,
    fit_ols,
    fit_statistics,
    format_summary,
    influence_flags,
    press_residuals,
)

rng = np.random.default_rng(42)
n = 120
X = rng.standard_normal((n, 3))
y = 4.0 + 1.5 * X[:, 0] - 2.0 * X[:, 2] + rng.standard_normal(n)

# plant a gross outlier with high leverage
X[7, :] = 6.0
y[7] = -40.0

design = DesignMatrix.from_arrays(X, y, names=["a", "b", "c"], response_name="outcome")
model = fit_ols(design)

print(format_summary(model))
stats = fit_statistics(model)
print(f"search-form AIC (k=2): {stats.aic_selection:.3f}\n")

report = influence_flags(model, top_m=5)
print(f"mean leverage {report.mean_leverage:.4f}; "
      f"{int(report.high_leverage.sum())} rows above twice the mean")
print(f"Cook threshold for the top-5 set: {report.cook_threshold:.4f}")
flagged = np.flatnonzero(report.top_influence)
print(f"top-influence rows (1-based): {(flagged + 1).tolist()}")

print("\nrow   leverage   cooks_d    press      dffits")
for i in sorted(set(flagged) | {7}):
    print(f"{i + 1:3d}   {report.leverage[i]:8.4f}  {report.cooks_d[i]:8.4f}  "
          f"{press_residuals(model)[i]:9.3f}  {dffits(model)[i]:9.3f}")

print("\nleverage sums to the rank:", round(model.leverage.sum(), 10), "=", model.rank)
