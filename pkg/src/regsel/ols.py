"""Ordinary least squares on a DesignMatrix.

The solver is a rank-revealing QR factorization with column pivoting, never
an explicit normal-equations inverse: the data this toolkit targets is
ill-conditioned by construction.  Columns whose pivoted diagonal falls below
``rank_tol * |R[0, 0]|`` are flagged aliased and excluded from estimation;
their coefficients are NaN and they contribute zero to predictions.

Two AIC conventions coexist on purpose: ``aic_selection`` is the
constant-free form ``n*ln(RSS/n) + k*rank`` that drives greedy search, and
``aic_full`` is the full Gaussian-likelihood form used in reports.  For a
fixed n they differ by a constant, so both rank a model family identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy import linalg, stats

from .table import DesignMatrix

__all__ = [
    "FittedModel",
    "FitStatistics",
    "fit_ols",
    "predict",
    "fit_statistics",
    "refit_log_response",
    "adjusted_r_squared",
    "aic_full_value",
    "aic_selection_value",
    "coefficient_table",
    "format_summary",
    "write_summary",
]

RANK_TOL = 1e-10
RSS_FLOOR_FACTOR = 1e-12


@dataclass(frozen=True)
class FittedModel:
    """Immutable OLS fit.

    ``coef`` has one entry per design column with NaN at aliased positions;
    ``leverage`` is the hat-matrix diagonal and sums to ``rank``.
    ``transform`` records the response scale ("identity" or "log").
    """

    design: DesignMatrix
    coef: np.ndarray
    aliased: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    rss: float
    rank: int
    leverage: np.ndarray
    transform: str = "identity"
    r_upper: np.ndarray | None = None   # rank x rank upper-triangular factor
    pivot: np.ndarray | None = None     # design columns for r_upper, in pivot order

    @property
    def n(self) -> int:
        return self.design.n_rows

    @property
    def p(self) -> int:
        return self.design.n_cols

    @property
    def sigma2(self) -> float:
        if self.n <= self.rank:
            raise ValueError("residual variance undefined: no residual degrees of freedom")
        return self.rss / (self.n - self.rank)


@dataclass(frozen=True)
class FitStatistics:
    r_squared: float
    adj_r_squared: float
    aic_full: float
    aic_selection: float
    sigma_hat: float


def _effective_coef(coef: np.ndarray, aliased: np.ndarray) -> np.ndarray:
    return np.where(aliased, 0.0, coef)


def pivoted_effective_coef(X: np.ndarray, y: np.ndarray, rank_tol: float = RANK_TOL):
    """Rank-revealing least squares on raw arrays.

    Returns (coef, aliased) where aliased columns carry coefficient zero,
    mirroring :func:`fit_ols` without the model bookkeeping.  Used by
    resampling loops that refit the same column block many times.
    """
    Q, R, piv = linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag[0] == 0.0:
        raise ValueError("design matrix is identically zero")
    rank = int(np.sum(diag >= rank_tol * diag[0]))
    beta_piv = linalg.solve_triangular(R[:rank, :rank], Q[:, :rank].T @ y)
    coef = np.zeros(X.shape[1])
    coef[piv[:rank]] = beta_piv
    aliased = np.ones(X.shape[1], dtype=bool)
    aliased[piv[:rank]] = False
    return coef, aliased


def fit_ols(design: DesignMatrix, strict: bool = False, rank_tol: float = RANK_TOL) -> FittedModel:
    """Fit least squares by pivoted QR.

    Parameters
    ----------
    design : DesignMatrix
    strict : bool
        When True, an all-zero design column is an error instead of being
        silently aliased.
    rank_tol : float
        Pivot threshold: column k is aliased when |R[k, k]| < rank_tol * |R[0, 0]|.

    Returns
    -------
    FittedModel
        With fitted values computed as ``X @ coef`` (aliased coefficients
        contribute zero), so in-sample prediction reproduces them exactly.
    """
    X, y = design.X, design.y
    n, p = X.shape
    if n < 1:
        raise ValueError("cannot fit on an empty design")
    if strict:
        zero = np.flatnonzero(~X.any(axis=0))
        if zero.size:
            raise ValueError(f"all-zero design column '{design.column_names[zero[0]]}' (strict mode)")

    Q, R, piv = linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag[0] == 0.0:
        raise ValueError("design matrix is identically zero")
    rank = int(np.sum(diag >= rank_tol * diag[0]))

    qty = Q[:, :rank].T @ y
    beta_piv = linalg.solve_triangular(R[:rank, :rank], qty)
    coef = np.full(p, np.nan)
    coef[piv[:rank]] = beta_piv
    aliased = np.ones(p, dtype=bool)
    aliased[piv[:rank]] = False

    fitted = X @ _effective_coef(coef, aliased)
    residuals = y - fitted
    rss = float(residuals @ residuals)
    leverage = np.einsum("ij,ij->i", Q[:, :rank], Q[:, :rank])
    return FittedModel(design=design, coef=coef, aliased=aliased, fitted=fitted,
                       residuals=residuals, rss=rss, rank=rank, leverage=leverage,
                       r_upper=R[:rank, :rank], pivot=piv[:rank])


def _check_alignment(model: FittedModel, new_design: DesignMatrix) -> None:
    old, new = model.design.terms, new_design.terms
    old_sig = [(t.name, t.kind, t.levels, len(t.columns)) for t in old]
    new_sig = [(t.name, t.kind, t.levels, len(t.columns)) for t in new]
    if old_sig != new_sig:
        missing = {s[0] for s in old_sig} - {s[0] for s in new_sig}
        if missing:
            raise ValueError(f"new design is missing terms: {', '.join(sorted(missing))}")
        raise ValueError("new design terms do not align with the model's design")
    if new_design.n_cols != model.design.n_cols:
        raise ValueError("column count mismatch between model and new design")


def predict(model: FittedModel, new_design: DesignMatrix) -> np.ndarray:
    """Predict on a design with the same term structure.

    Returns values on the model's response scale (no back-transform); the
    aliased columns contribute zero, matching the reference-level fallback
    for factor levels unseen at fit time.
    """
    _check_alignment(model, new_design)
    return new_design.X @ _effective_coef(model.coef, model.aliased)


# ---------------------------------------------------------------------------
# Fit statistics
# ---------------------------------------------------------------------------


def adjusted_r_squared(r_squared: float, n: int, rank: int) -> float:
    """1 - (1 - R^2) * (n - 1) / (n - rank)."""
    if n - rank < 1:
        raise ValueError("adjusted R-squared undefined: n <= rank")
    return 1.0 - (1.0 - r_squared) * (n - 1) / (n - rank)


def aic_full_value(rss: float, n: int, rank: int) -> float:
    """Gaussian-likelihood AIC counting the variance parameter: n*ln(2*pi) + n*ln(RSS/n) + n + 2*(rank + 1)."""
    return n * math.log(2.0 * math.pi) + n * math.log(rss / n) + n + 2.0 * (rank + 1)


def aic_selection_value(rss: float, n: int, rank: int, k: float = 2.0) -> float:
    """Constant-free search AIC: n*ln(RSS/n) + k*rank."""
    return n * math.log(rss / n) + k * rank


def fit_statistics(model: FittedModel, k: float = 2.0) -> FitStatistics:
    """R-squared, adjusted R-squared, both AIC variants and sigma-hat.

    R-squared uses the total sum of squares about the mean (an intercept is
    always present here); an intercept-only model has R-squared identically
    zero.  A near-perfect fit (RSS below 1e-12 * TSS) leaves the log-AIC
    undefined and raises.
    """
    n, r = model.n, model.rank
    if n - r < 1:
        raise ValueError("fit statistics undefined: no residual degrees of freedom")
    y = model.design.y
    tss = float(np.sum((y - y.mean()) ** 2))
    if model.rss <= RSS_FLOOR_FACTOR * tss:
        raise ValueError("AIC undefined: residual sum of squares is (numerically) zero")
    r_squared = 0.0 if not model.design.terms else 1.0 - model.rss / tss
    return FitStatistics(
        r_squared=r_squared,
        adj_r_squared=adjusted_r_squared(r_squared, n, r),
        aic_full=aic_full_value(model.rss, n, r),
        aic_selection=aic_selection_value(model.rss, n, r, k),
        sigma_hat=math.sqrt(model.rss / (n - r)),
    )


def refit_log_response(model: FittedModel) -> FittedModel:
    """Refit the identical design against ln(y); requires a strictly positive response."""
    y = model.design.y
    bad = np.flatnonzero(y <= 0.0)
    if bad.size:
        i = int(bad[0])
        raise ValueError(
            f"log transform requires positive response values; row {i + 1} "
            f"(id {model.design.row_ids[i]}) has y = {y[i]}")
    log_design = replace(model.design, y=np.log(y))
    refit = fit_ols(log_design)
    return replace(refit, transform="log")


# ---------------------------------------------------------------------------
# Coefficient table / model dump
# ---------------------------------------------------------------------------


def coefficient_table(model: FittedModel):
    """Rows of (name, estimate, std_error, t_value, p_value); NaNs mark aliased columns."""
    n, r = model.n, model.rank
    if n - r < 1:
        raise ValueError("standard errors undefined: no residual degrees of freedom")
    sigma = math.sqrt(model.sigma2)
    rinv = linalg.solve_triangular(model.r_upper, np.eye(r))
    unscaled = np.einsum("ij,ij->i", rinv, rinv)   # diag of (R'R)^-1
    se = np.full(model.p, np.nan)
    se[model.pivot] = sigma * np.sqrt(unscaled)
    rows = []
    for j, name in enumerate(model.design.column_names):
        est = model.coef[j]
        if model.aliased[j]:
            rows.append((name, math.nan, math.nan, math.nan, math.nan))
            continue
        t = est / se[j]
        p = 2.0 * float(stats.t.sf(abs(t), n - r))
        rows.append((name, float(est), float(se[j]), float(t), p))
    return rows


def _stars(p: float) -> str:
    if math.isnan(p):
        return ""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    if p < 0.1:
        return "."
    return ""


def format_summary(model: FittedModel, k: float = 2.0) -> str:
    """Plain-text model report: formula, coefficient table, error and R-squared lines."""
    rows = coefficient_table(model)
    stat = fit_statistics(model, k=k)
    n, r = model.n, model.rank
    response = model.design.response_name
    if model.transform == "log":
        response = f"log({response})"
    from .table import model_formula

    name_w = max(len(r_[0]) for r_ in rows)
    lines = [f"Formula: {model_formula(model.design.term_names, response)}", "", "Coefficients:"]
    header = f"{'':{name_w}}  {'Estimate':>12}  {'Std. Error':>12}  {'t value':>8}  {'Pr(>|t|)':>10}"
    lines.append(header)
    for name, est, se, t, p in rows:
        if math.isnan(est):
            lines.append(f"{name:{name_w}}  {'NA':>12}  {'NA':>12}  {'NA':>8}  {'NA':>10}  (aliased)")
        else:
            lines.append(
                f"{name:{name_w}}  {est:>12.4f}  {se:>12.4f}  {t:>8.3f}  {_format_p(p):>10} {_stars(p)}")
    lines.append("")
    lines.append(f"Residual standard error: {stat.sigma_hat:.4g} on {n - r} degrees of freedom")
    lines.append(
        f"Multiple R-squared: {stat.r_squared:.4f}, Adjusted R-squared: {stat.adj_r_squared:.4f}")
    if r > 1:
        y = model.design.y
        tss = float(np.sum((y - y.mean()) ** 2))
        f_val = ((tss - model.rss) / (r - 1)) / model.sigma2
        f_p = float(stats.f.sf(f_val, r - 1, n - r))
        lines.append(
            f"F-statistic: {f_val:.4g} on {r - 1} and {n - r} DF, p-value: {_format_p(f_p)}")
    lines.append(f"AIC: {stat.aic_full:.4f} (search form with k={k:g}: {stat.aic_selection:.4f})")
    return "\n".join(lines) + "\n"


def _format_p(p: float) -> str:
    if p < 2.2e-16:
        return "< 2.2e-16"
    return f"{p:.6g}"


def write_summary(model: FittedModel, text_path, tsv_path=None, k: float = 2.0):
    """Write the plain-text report, and optionally a machine-readable TSV of the coefficient table."""
    text_path = Path(text_path)
    text_path.write_text(format_summary(model, k=k), encoding="utf-8")
    paths = [text_path]
    if tsv_path is not None:
        tsv_path = Path(tsv_path)
        lines = ["name\testimate\tstd_error\tt_value\tp_value\taliased"]
        for name, est, se, t, p in coefficient_table(model):
            if math.isnan(est):
                lines.append(f"{name}\tNA\tNA\tNA\tNA\t1")
            else:
                lines.append(f"{name}\t{est!r}\t{se!r}\t{t!r}\t{p!r}\t0")
        tsv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(tsv_path)
    return paths
