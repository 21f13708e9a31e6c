"""Greedy model-space search over term groups under the selection AIC.

Moves operate on whole terms: a factor's indicator columns enter and leave
together.  At every iteration all legal single-term moves are fitted, and
the minimum-AIC move is applied if it beats the current model by more than
``tol_aic`` (1e-9 by default, so floating-point ties cannot loop).  Ties
between candidate moves go to the term earliest in the design's term order.

Forward search starts from the scope's lower model, backward from the upper
model.  Both-direction search also starts from the upper model by default;
pass ``start=scope.lower`` for the textbook intercept-only start.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .influence import dffits, press_residuals
from .ols import FittedModel, fit_ols, fit_statistics
from .table import DesignMatrix, model_formula

__all__ = [
    "Scope",
    "Move",
    "SelectionTrace",
    "step_select",
    "ComparisonTable",
    "compare_models",
    "ExclusionComparison",
    "refit_excluding_rows",
    "format_trace",
]

TOL_AIC = 1e-9
MODES = ("forward", "backward", "both")


@dataclass(frozen=True)
class Scope:
    """Search bounds: lower terms are never removed, terms outside upper never enter.

    ``upper=None`` means every term of the design; ``k`` is the AIC penalty
    per estimated coefficient.
    """

    lower: tuple = ()
    upper: tuple | None = None
    k: float = 2.0

    def resolve(self, design: DesignMatrix):
        all_terms = design.term_names
        upper = all_terms if self.upper is None else tuple(self.upper)
        lower = tuple(self.lower)
        unknown = (set(lower) | set(upper)) - set(all_terms)
        if unknown:
            raise KeyError(f"scope names unknown terms: {', '.join(sorted(unknown))}")
        if not set(lower) <= set(upper):
            raise ValueError("scope lower model must be a subset of the upper model")
        if self.k <= 0:
            raise ValueError(f"penalty k must be positive, got {self.k}")
        order = {name: i for i, name in enumerate(all_terms)}
        return (tuple(sorted(lower, key=order.get)), tuple(sorted(upper, key=order.get)))


@dataclass(frozen=True)
class Move:
    direction: str          # "add" | "remove"
    term: str
    aic_before: float
    aic_after: float


@dataclass(frozen=True)
class SelectionTrace:
    mode: str
    start: tuple
    moves: tuple
    final: FittedModel
    aic_start: float
    skipped: tuple = ()

    @property
    def final_terms(self) -> tuple:
        return self.final.design.term_names

    @property
    def final_aic(self) -> float:
        return self.moves[-1].aic_after if self.moves else self.aic_start

    def formula(self) -> str:
        return model_formula(self.final_terms, self.final.design.response_name)


def _fit_terms(design: DesignMatrix, terms, k: float):
    model = fit_ols(design.subset_terms(terms))
    return model, fit_statistics(model, k=k).aic_selection


def step_select(design: DesignMatrix, scope: Scope | None = None, mode: str = "forward",
                start=None, tol_aic: float = TOL_AIC) -> SelectionTrace:
    """Greedy forward / backward / both-direction term selection.

    Parameters
    ----------
    design : DesignMatrix
        Encoded data; term groups are the units of search.
    scope : Scope
        Lower/upper bounds and the AIC penalty k (defaults: intercept-only
        lower, all terms upper, k = 2).
    mode : {"forward", "backward", "both"}
    start : iterable of term names, optional
        Starting model.  Defaults: lower for forward, upper for backward and
        for both.
    tol_aic : float
        A move is applied only if it lowers the AIC by more than this.

    Returns
    -------
    SelectionTrace
        Ordered add/remove moves with the AIC before and after each, the
        fitted final model, and a log of any skipped candidate fits.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    scope = scope or Scope()
    lower, upper = scope.resolve(design)
    order = {name: i for i, name in enumerate(design.term_names)}

    if start is None:
        start = lower if mode == "forward" else upper
    start = tuple(sorted(set(start), key=order.get))
    if not set(lower) <= set(start) <= set(upper):
        raise ValueError("start model must lie within the scope")

    current = set(start)
    model, current_aic = _fit_terms(design, current, scope.k)
    aic_start = current_aic
    moves: list = []
    skipped: list = []

    can_add = mode in ("forward", "both")
    can_remove = mode in ("backward", "both")
    upper_set, lower_set = set(upper), set(lower)

    while True:
        best = None     # (aic, order index, direction, term, model)
        for term in design.term_names:
            if term in current:
                if not can_remove or term in lower_set:
                    continue
                direction, candidate = "remove", current - {term}
            else:
                if not can_add or term not in upper_set:
                    continue
                direction, candidate = "add", current | {term}
            try:
                cand_model, cand_aic = _fit_terms(design, candidate, scope.k)
            except (ValueError, np.linalg.LinAlgError) as exc:
                skipped.append(f"{direction} {term}: {exc}")
                continue
            if best is None or cand_aic < best[0]:
                best = (cand_aic, order[term], direction, term, cand_model)
        if best is None or best[0] >= current_aic - tol_aic:
            break
        cand_aic, _, direction, term, cand_model = best
        moves.append(Move(direction=direction, term=term,
                          aic_before=current_aic, aic_after=cand_aic))
        current = current - {term} if direction == "remove" else current | {term}
        model, current_aic = cand_model, cand_aic

    return SelectionTrace(mode=mode, start=start, moves=tuple(moves), final=model,
                          aic_start=aic_start, skipped=tuple(skipped))


def format_trace(trace: SelectionTrace) -> str:
    """Trace file body: one ``step<TAB>add|remove<TAB>term<TAB>aic_before<TAB>aic_after``
    line per move, then the final model formula."""
    lines = ["step\tdirection\tterm\taic_before\taic_after"]
    for i, mv in enumerate(trace.moves, start=1):
        lines.append(f"{i}\t{mv.direction}\t{mv.term}\t{mv.aic_before!r}\t{mv.aic_after!r}")
    lines.append(f"formula\t{trace.formula()}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Cross-model comparison
# ---------------------------------------------------------------------------

COMPARISON_ROWS = (
    "sum_sq_press",
    "aic",
    "adj_r_squared",
    "sum_sq_dffits",
    "rank",
)


@dataclass(frozen=True)
class ComparisonTable:
    """Five diagnostics per candidate model: sum-of-squared PRESS, full AIC,
    adjusted R-squared, sum-of-squared DFFITS, and rank."""

    labels: tuple
    cells: dict            # row name -> tuple of values, one per label

    def column(self, label: str) -> dict:
        j = self.labels.index(label)
        return {row: self.cells[row][j] for row in COMPARISON_ROWS}

    def render(self) -> str:
        width = max(12, *(len(l) for l in self.labels))
        lines = ["metric".ljust(22) + "".join(l.rjust(width + 2) for l in self.labels)]
        for row in COMPARISON_ROWS:
            vals = self.cells[row]
            fmt = (lambda v: f"{v:.0f}") if row == "rank" else (lambda v: f"{v:.4f}")
            lines.append(row.ljust(22) + "".join(fmt(v).rjust(width + 2) for v in vals))
        return "\n".join(lines) + "\n"

    def to_tsv(self) -> str:
        lines = ["metric\t" + "\t".join(self.labels)]
        for row in COMPARISON_ROWS:
            lines.append(row + "\t" + "\t".join(repr(float(v)) for v in self.cells[row]))
        return "\n".join(lines) + "\n"


def compare_models(models, labels=None) -> ComparisonTable:
    """Build the comparison table for models fitted on the same rows."""
    models = list(models)
    if not models:
        raise ValueError("no models to compare")
    ns = {m.n for m in models}
    if len(ns) > 1:
        raise ValueError(f"models were fitted on differing row counts {sorted(ns)}; "
                         "their diagnostics are not comparable")
    if labels is None:
        labels = tuple(f"model{i + 1}" for i in range(len(models)))
    labels = tuple(labels)
    if len(labels) != len(models):
        raise ValueError("labels length must match the number of models")
    press_sq, aics, adj, dff_sq, ranks = [], [], [], [], []
    for m in models:
        stat = fit_statistics(m)
        press_sq.append(float(np.sum(press_residuals(m) ** 2)))
        aics.append(stat.aic_full)
        adj.append(stat.adj_r_squared)
        dff_sq.append(float(np.sum(dffits(m) ** 2)))
        ranks.append(float(m.rank))
    return ComparisonTable(labels=labels, cells={
        "sum_sq_press": tuple(press_sq),
        "aic": tuple(aics),
        "adj_r_squared": tuple(adj),
        "sum_sq_dffits": tuple(dff_sq),
        "rank": tuple(ranks),
    })


# ---------------------------------------------------------------------------
# Outlier-exclusion rerun
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExclusionComparison:
    """Selection results on the full data and on the data minus the excluded rows."""

    excluded: tuple
    baseline_traces: dict
    filtered_traces: dict
    baseline_table: ComparisonTable
    filtered_table: ComparisonTable

    def side_by_side(self) -> str:
        lines = ["metric\t" + "\t".join(
            [f"{l}_full" for l in self.baseline_table.labels]
            + [f"{l}_excluded" for l in self.filtered_table.labels])]
        for row in COMPARISON_ROWS:
            vals = list(self.baseline_table.cells[row]) + list(self.filtered_table.cells[row])
            lines.append(row + "\t" + "\t".join(repr(float(v)) for v in vals))
        return "\n".join(lines) + "\n"


def refit_excluding_rows(design: DesignMatrix, excluded, scope: Scope | None = None,
                         modes=MODES, tol_aic: float = TOL_AIC,
                         baseline: dict | None = None) -> ExclusionComparison:
    """Rerun every selection mode on the design minus the given rows (0-based).

    ``baseline`` may supply already computed full-data traces (keyed by
    mode); otherwise they are recomputed so the comparison is self-contained.
    """
    scope = scope or Scope()
    excluded = tuple(int(i) for i in excluded)
    _, upper = scope.resolve(design)
    upper_cols = len(design.columns_for(upper))
    filtered = design.drop_rows(excluded) if excluded else design
    if filtered.n_rows <= upper_cols:
        raise ValueError(
            f"excluding {len(excluded)} rows leaves {filtered.n_rows} rows, not enough "
            f"for the {upper_cols}-column upper model")

    if baseline is None:
        baseline = {m: step_select(design, scope, mode=m, tol_aic=tol_aic) for m in modes}
    else:
        baseline = dict(baseline)
        for m in modes:
            if m not in baseline:
                baseline[m] = step_select(design, scope, mode=m, tol_aic=tol_aic)
    filtered_traces = {m: step_select(filtered, scope, mode=m, tol_aic=tol_aic) for m in modes}

    baseline_table = compare_models([baseline[m].final for m in modes], labels=tuple(modes))
    filtered_table = compare_models([filtered_traces[m].final for m in modes], labels=tuple(modes))
    return ExclusionComparison(excluded=excluded, baseline_traces=baseline,
                               filtered_traces=filtered_traces,
                               baseline_table=baseline_table, filtered_table=filtered_table)
