"""Result records, deterministic CSV tables and a dependency-free SVG plot."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

from .analytic import NetworkScenario, eta_ratio

RESULT_COLUMNS = ("model", "variant", "lambda_bs_per_km2", "r_exc_km", "mean_dbm", "error_db",
                  "elevation_parameter", "eta")
ETA_COLUMNS = ("elevation_parameter", "lambda_bs_per_km2", "eta", "eta_db")


@dataclass(frozen=True)
class ResultRow:
    model: str
    variant: str  # circumradius source or Monte Carlo mode
    lambda_bs_per_km2: float
    r_exc_km: float
    mean_watts: float
    error_db: float
    elevation_parameter: float
    eta: float | None = None
    wall_time_s: float = 0.0

    @property
    def mean_dbm(self) -> float:
        return 10.0 * math.log10(self.mean_watts) + 30.0

    @property
    def ok(self) -> bool:
        return self.mean_watts > 0 and math.isfinite(self.mean_watts) and math.isfinite(self.error_db)


def fmt(x) -> str:
    """Fixed textual form for floats so output is byte-stable."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".10g")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _sort_key(r: ResultRow):
    return (r.model, r.variant, r.lambda_bs_per_km2, r.r_exc_km)


def write_results_csv(rows, path) -> None:
    """results.csv: one row per (model, variant, lambda, r_exc), sorted; no timing columns."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(RESULT_COLUMNS)
        for r in sorted(rows, key=_sort_key):
            w.writerow([r.model, r.variant, fmt(r.lambda_bs_per_km2), fmt(r.r_exc_km),
                        fmt(r.mean_dbm), fmt(r.error_db), fmt(r.elevation_parameter), fmt(r.eta)])


def write_timings_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(("model", "variant", "lambda_bs_per_km2", "r_exc_km", "wall_time_s"))
        for r in sorted(rows, key=_sort_key):
            w.writerow([r.model, r.variant, fmt(r.lambda_bs_per_km2), fmt(r.r_exc_km),
                        f"{r.wall_time_s:.4f}"])


def eta_rows(scenarios, distributions) -> list[tuple[float, float, float]]:
    """(elevation parameter, lambda per km^2, eta) sorted by elevation parameter."""
    rows = [(s.elevation_parameter, s.intensity_bs * 1e6, eta_ratio(s, d))
            for s, d in zip(scenarios, distributions)]
    return sorted(rows)


def emit_eta_table(scenarios: list[NetworkScenario], distributions, path=None):
    """Eta table rows; written as CSV when ``path`` is given."""
    if not scenarios:
        raise ValueError("need at least one scenario")
    rows = eta_rows(scenarios, distributions)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = _writer(fh)
            w.writerow(ETA_COLUMNS)
            for p, lam, eta in rows:
                w.writerow([fmt(p), fmt(lam), fmt(eta), fmt(10.0 * math.log10(eta))])
    return rows


# --- SVG ---------------------------------------------------------------------------

_COLORS = {"cbc": "#1f77b4", "cbc-approx": "#17becf", "aaecc": "#d62728",
           "aaecc-approx": "#ff9896", "monte-carlo": "#2ca02c"}
_DASHES = ["", "6,3", "2,3", "8,3,2,3", "1,2"]


def _nice_ticks(lo, hi, n=6):
    span = hi - lo
    raw = span / max(n - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        if t >= lo - 1e-9 * step:
            ticks.append(round(t, 10))
        t += step
    return ticks


def write_fig3_svg(rows, path, width: int = 760, height: int = 520) -> None:
    """Interference (dBm) against exclusion radius (km), one polyline per (model, variant, lambda)."""
    rows = [r for r in rows if r.ok]
    if not rows:
        raise ValueError("no finite rows to plot")
    curves: dict[tuple, list[ResultRow]] = {}
    for r in sorted(rows, key=_sort_key):
        curves.setdefault((r.model, r.variant, r.lambda_bs_per_km2), []).append(r)
    lams = sorted({k[2] for k in curves})

    left, right, top, bottom = 70, 250, 30, 60
    pw, ph = width - left - right, height - top - bottom
    xs = [r.r_exc_km for r in rows]
    ys = [r.mean_dbm for r in rows]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    y0, y1 = math.floor(min(ys) / 5) * 5, math.ceil(max(ys) / 5) * 5
    if y1 == y0:
        y1 = y0 + 5

    def X(v):
        return left + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return top + (y1 - v) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _nice_ticks(x0, x1):
        out.append(f'<line x1="{X(t):.2f}" y1="{top + ph}" x2="{X(t):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X(t):.2f}" y="{top + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(y0, y1):
        out.append(f'<line x1="{left}" y1="{Y(t):.2f}" x2="{left + pw}" y2="{Y(t):.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{Y(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 15}" text-anchor="middle">'
               f'exclusion zone radius (km)</text>')
    out.append(f'<text transform="translate(18 {top + ph / 2}) rotate(-90)" text-anchor="middle">'
               f'mean interference (dBm)</text>')

    for i, ((model, variant, lam), pts) in enumerate(curves.items()):
        color = _COLORS.get(model, "black")
        dash = _DASHES[lams.index(lam) % len(_DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        coords = " ".join(f"{X(r.r_exc_km):.2f},{Y(r.mean_dbm):.2f}" for r in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.6"{dash_attr}/>')
        if model == "monte-carlo":
            for r in pts:
                out.append(f'<circle cx="{X(r.r_exc_km):.2f}" cy="{Y(r.mean_dbm):.2f}" r="2.5" fill="{color}"/>')
        ly = top + 10 + 16 * i
        lx = left + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="1.6"{dash_attr}/>')
        label = escape(f"{model} [{variant}] lambda={lam:g}/km2")
        out.append(f'<text x="{lx + 30}" y="{ly + 4}" font-size="10">{label}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8", newline="\n")
