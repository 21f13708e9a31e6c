"""Delimited plot-data emission: influence scatters, residual diagnostics,
added-variable data, VIF histograms, and optional SVG renderings.

Data files are the contract; the SVG helpers are display sugar over the
same numbers.  Every file is a deterministic function of its inputs (no
timestamps), so report bundles can be compared byte for byte.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from scipy import stats

from .influence import InfluenceReport, added_variable_data, studentized
from .ols import FittedModel

__all__ = [
    "write_influence_data",
    "residual_diagnostics",
    "write_added_variable_data",
    "write_vif_values",
    "write_vif_histogram",
    "svg_scatter",
    "svg_boxplot",
]


def write_influence_data(model: FittedModel, report: InfluenceReport, path) -> Path:
    """Influence plot data: one row per observation with both flag rules.

    Two metadata lines carry the 2*mean-leverage cutoff and the Cook's
    distance threshold, so the scatter (flags, cutoff line and all) can be
    redrawn from this file alone.
    """
    path = Path(path)
    lines = [
        f"# two_hbar\t{2.0 * report.mean_leverage!r}",
        f"# cook_threshold\t{report.cook_threshold!r}",
        "row_id\tleverage\tcooks_d\thigh_leverage_flag\ttop_influence_flag",
    ]
    for i in range(model.n):
        lines.append("\t".join([
            str(i + 1),
            repr(float(report.leverage[i])),
            repr(float(report.cooks_d[i])),
            str(int(report.high_leverage[i])),
            str(int(report.top_influence[i])),
        ]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def residual_diagnostics(model: FittedModel, out_dir, prefix: str = "model") -> list:
    """Residual diagnostic data: residuals vs index, residuals vs fitted,
    a normal QQ pairing of sorted externally studentized residuals with
    N(0,1) quantiles at (i - 0.5)/n, and a histogram binning of the
    studentized residuals (Sturges bins, edges emitted)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    e = model.residuals
    n = e.size
    paths = []

    lines = ["index\tresidual"]
    lines += [f"{i + 1}\t{float(e[i])!r}" for i in range(n)]
    paths.append(_write(out_dir / f"{prefix}_resid_vs_index.tsv", lines))

    lines = ["fitted\tresidual"]
    lines += [f"{float(model.fitted[i])!r}\t{float(e[i])!r}" for i in range(n)]
    paths.append(_write(out_dir / f"{prefix}_resid_vs_fitted.tsv", lines))

    t = studentized(model, "external")
    order = np.argsort(t)
    probs = (np.arange(1, n + 1) - 0.5) / n
    theo = stats.norm.ppf(probs)
    lines = ["theoretical_quantile\tstudentized_residual"]
    lines += [f"{float(q)!r}\t{float(t[order[i]])!r}" for i, q in enumerate(theo)]
    paths.append(_write(out_dir / f"{prefix}_qq.tsv", lines))

    counts, edges = np.histogram(t, bins="sturges")
    lines = ["bin_left\tbin_right\tcount"]
    lines += [f"{float(edges[i])!r}\t{float(edges[i + 1])!r}\t{int(c)}"
              for i, c in enumerate(counts)]
    paths.append(_write(out_dir / f"{prefix}_studentized_hist.tsv", lines))
    return paths


def write_added_variable_data(model: FittedModel, out_dir, prefix: str = "av") -> list:
    """Added-variable data for every single-column term of the model."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for term in model.design.terms:
        if len(term.columns) != 1:
            continue
        av = added_variable_data(model, term.name)
        lines = [f"# slope\t{av.slope!r}", "x_partial\ty_partial"]
        lines += [f"{float(x)!r}\t{float(y)!r}" for x, y in zip(av.x_partial, av.y_partial)]
        paths.append(_write(out_dir / f"{prefix}_{term.name}.tsv", lines))
    return paths


def write_vif_values(values: dict, path) -> Path:
    lines = ["variable\tvif"]
    for name, v in values.items():
        lines.append(f"{name}\t{'inf' if math.isinf(v) else repr(float(v))}")
    return _write(Path(path), lines)


def write_vif_histogram(values: dict, path) -> Path:
    """Histogram binning of the finite VIFs, bin edges included."""
    finite = np.array([v for v in values.values() if math.isfinite(v)])
    path = Path(path)
    if finite.size == 0:
        return _write(path, ["bin_left\tbin_right\tcount"])
    counts, edges = np.histogram(finite, bins="sturges")
    lines = ["bin_left\tbin_right\tcount"]
    lines += [f"{float(edges[i])!r}\t{float(edges[i + 1])!r}\t{int(c)}"
              for i, c in enumerate(counts)]
    return _write(path, lines)


def _write(path: Path, lines) -> Path:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Optional SVG rendering
# ---------------------------------------------------------------------------

_SVG_W, _SVG_H, _PAD = 640, 480, 50


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo or 1.0
    return [(out_lo + (v - lo) / span * (out_hi - out_lo)) for v in values]


def svg_scatter(x, y, path, highlight=None, xlabel: str = "x", ylabel: str = "y",
                vline: float | None = None) -> Path:
    """Minimal scatter-plot SVG; `highlight` marks points in a second colour."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    highlight = np.zeros(x.size, dtype=bool) if highlight is None else np.asarray(highlight, dtype=bool)
    xs = _scale(x, x.min(), x.max(), _PAD, _SVG_W - _PAD)
    ys = _scale(y, y.min(), y.max(), _SVG_H - _PAD, _PAD)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}">',
             f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>']
    if vline is not None and x.max() > x.min():
        vx = _scale([vline], x.min(), x.max(), _PAD, _SVG_W - _PAD)[0]
        parts.append(f'<line x1="{vx:.1f}" y1="{_PAD}" x2="{vx:.1f}" y2="{_SVG_H - _PAD}" '
                     'stroke="purple" stroke-dasharray="4"/>')
    for cx, cy, hot in zip(xs, ys, highlight):
        colour = "red" if hot else "black"
        parts.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="2.5" fill="{colour}"/>')
    parts.append(f'<text x="{_SVG_W / 2:.0f}" y="{_SVG_H - 12}" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="14" y="{_SVG_H / 2:.0f}" transform="rotate(-90 14 {_SVG_H / 2:.0f})" '
                 f'text-anchor="middle">{ylabel}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return path


def svg_boxplot(groups: dict, path, ylabel: str = "value") -> Path:
    """Side-by-side boxplots (median, quartile box, 1.5*IQR whiskers, outlier dots)."""
    from .crossval import five_number_summary

    labels = list(groups)
    all_vals = np.concatenate([np.asarray(groups[l], dtype=float) for l in labels])
    lo, hi = float(all_vals.min()), float(all_vals.max())

    def sy(v):
        return _scale([v], lo, hi, _SVG_H - _PAD, _PAD)[0]

    slot = (_SVG_W - 2 * _PAD) / len(labels)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}">',
             f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>']
    for i, label in enumerate(labels):
        v = np.asarray(groups[label], dtype=float)
        s = five_number_summary(v)
        lo_f, hi_f = s.q1 - 1.5 * s.iqr, s.q3 + 1.5 * s.iqr
        inside = v[(v >= lo_f) & (v <= hi_f)]
        whis_lo = float(inside.min()) if inside.size else s.q1
        whis_hi = float(inside.max()) if inside.size else s.q3
        cx = _PAD + slot * (i + 0.5)
        half = min(40.0, slot * 0.3)
        parts.append(f'<line x1="{cx:.1f}" y1="{sy(whis_lo):.1f}" x2="{cx:.1f}" y2="{sy(s.q1):.1f}" stroke="black"/>')
        parts.append(f'<line x1="{cx:.1f}" y1="{sy(s.q3):.1f}" x2="{cx:.1f}" y2="{sy(whis_hi):.1f}" stroke="black"/>')
        parts.append(f'<rect x="{cx - half:.1f}" y="{sy(s.q3):.1f}" width="{2 * half:.1f}" '
                     f'height="{abs(sy(s.q1) - sy(s.q3)):.1f}" fill="lightyellow" stroke="black"/>')
        parts.append(f'<line x1="{cx - half:.1f}" y1="{sy(s.median):.1f}" x2="{cx + half:.1f}" '
                     f'y2="{sy(s.median):.1f}" stroke="black" stroke-width="2"/>')
        for out in v[(v < lo_f) | (v > hi_f)]:
            parts.append(f'<circle cx="{cx:.1f}" cy="{sy(float(out)):.1f}" r="2" fill="black"/>')
        parts.append(f'<text x="{cx:.1f}" y="{_SVG_H - 20}" text-anchor="middle">{label}</text>')
    parts.append(f'<text x="14" y="{_SVG_H / 2:.0f}" transform="rotate(-90 14 {_SVG_H / 2:.0f})" '
                 f'text-anchor="middle">{ylabel}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return path
