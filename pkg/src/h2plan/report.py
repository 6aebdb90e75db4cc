"""Flat CSV run outputs and dependency-free SVG charts.

Everything written here is byte-for-byte deterministic: numbers use
``repr(float)`` in CSVs and fixed-precision formatting in SVGs, and rows are
emitted in scenario order.
"""

from __future__ import annotations

import csv
import html
import logging
import math
from pathlib import Path

import numpy as np

from .assemble import PlanSolution, cost_breakdown

log = logging.getLogger(__name__)

MONTH_DAYS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)
DISPATCH_HEADER = ["quantity", "region", "technology", "hour", "value"]

# series plotted as heatmaps, keyed by the label used in file names
DEVICE_CLASSES = {
    "TU": ("P", ("TU", "CHP")), "WT": ("P", ("WT",)), "PV": ("P", ("PV",)), "EC": ("P", ("EC",)),
    "HT": ("P", ("HT",)), "FC": ("P", ("FC",)), "EB": ("P", ("EB",)),
    "ES_charge": ("ch", ("BES", "HPS")), "ES_discharge": ("dis", ("BES", "HPS")),
    "HS_charge": ("ch", ("HS",)), "HS_discharge": ("dis", ("HS",)),
}


def _f(v: float) -> str:
    return repr(float(v))


def _write(path: Path, header: list[str], rows) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


# --------------------------------------------------------------------------
# plan outputs


def write_plan(sol: PlanSolution, out: str | Path) -> dict[str, Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    sc = sol.scenario
    files = {}
    files["capacity"] = _write(out / "capacity.csv", ["region", "technology", "new", "total"], [
        [r, k, _f(sol.new_capacity[(r, k)]), _f(v)] for (r, k), v in sol.total_capacity.items()])
    files["technologies"] = _write(out / "technologies.csv", ["id", "kind"],
                                   [[t.id, t.kind] for t in sc.technologies])
    files["lines"] = _write(out / "lines.csv", ["from", "to", "new_mw", "total_mw"], [
        [a, b, _f(sol.line_new[(a, b)]), _f(v)] for (a, b), v in sol.line_total.items()])
    rows = []
    for (q, r, t), v in sol.series.items():
        rows += [[q, r, t or "", h + 1, _f(x)] for h, x in enumerate(v)]
    for (a, b), v in sol.flows.items():
        rows += [["flow", f"{a}>{b}", "LINE", h + 1, _f(x)] for h, x in enumerate(v)]
    files["dispatch"] = _write(out / "dispatch.csv", DISPATCH_HEADER, rows)
    inj = sol.regional_hydrogen_injection()
    files["hydrogen"] = _write(out / "hydrogen_injection.csv", ["region", "hour", "kg_per_h"], [
        [r, h + 1, _f(x)] for r, v in inj.items() for h, x in enumerate(v)])
    costs = cost_breakdown(sol)
    files["costs"] = _write(out / "costs.csv", ["component", "usd"], [[k, _f(v)] for k, v in costs.items()])
    files["residuals"] = write_residuals(sol, out / "residuals.csv")
    summary = [
        ["mode", sol.mode], ["objective", _f(sol.objective)], ["total_cost_usd", _f(costs["total"])],
        ["co2_tons", _f(sol.co2)], ["renewable_curtailment_mwh", _f(sol.renewable_curtailment)],
        ["heat_curtailment_mwh", _f(sol.heat_curtailment)], ["hours", sc.T],
        ["flags", "; ".join(sol.flags)],
    ]
    files["summary"] = _write(out / "summary.csv", ["key", "value"], summary)
    return files


def residual_table(sol: PlanSolution, tol: float = 1e-6) -> list[list]:
    """[balance, region, max |residual|, relative to peak demand, pass]."""
    sc = sol.scenario
    rows = []
    peak_e = max(float(np.max(np.asarray(r.electric_demand) + np.asarray(r.export_demand))) for r in sc.regions)
    peak_h = max(float(np.max(r.heat_demand)) for r in sc.regions)
    peak_m = max(float(np.max(sol.scenario.region(r.id).hydrogen_demand)) for r in sc.regions)
    for name, peak in (("electric", peak_e), ("heat", peak_h)):
        for i, r in enumerate(sc.regions):
            worst = float(np.max(np.abs(sol.residuals[name][i]))) if sc.T else 0.0
            rel = worst / max(peak, 1.0)
            rows.append([name, r.id, worst, rel, rel <= tol])
    worst = float(np.max(np.abs(sol.residuals["hydrogen"]))) if sc.T else 0.0
    rel = worst / max(peak_m, 1.0)
    rows.append(["hydrogen", "system", worst, rel, rel <= tol])
    return rows


def write_residuals(sol: PlanSolution, path: Path) -> Path:
    return _write(path, ["balance", "region", "max_abs", "relative", "pass"],
                  [[b, r, _f(w), _f(rel), "pass" if ok else "FAIL"] for b, r, w, rel, ok in residual_table(sol)])


def read_dispatch(path: str | Path) -> dict[tuple[str, str, str], np.ndarray]:
    series: dict[tuple[str, str, str], list[tuple[int, float]]] = {}
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            key = (row["quantity"], row["region"], row["technology"])
            series.setdefault(key, []).append((int(row["hour"]), float(row["value"])))
    out = {}
    for key, pts in series.items():
        pts.sort()
        out[key] = np.array([v for _, v in pts])
    return out


# --------------------------------------------------------------------------
# aggregation


def month_of_hour(T: int) -> np.ndarray:
    """Month index 0..11 for hours 1..T, counting from 1 January of a 365-day year."""
    months = np.repeat(np.arange(12), np.array(MONTH_DAYS) * 24)
    return months[np.arange(T) % len(months)]


def monthly_hour_means(values) -> np.ndarray:
    """12 x 24 array: mean over days of each month at each hour of day (NaN where no data)."""
    v = np.asarray(values, dtype=float)
    month = month_of_hour(v.size)
    hod = np.arange(v.size) % 24
    total = np.zeros((12, 24))
    count = np.zeros((12, 24))
    np.add.at(total, (month, hod), v)
    np.add.at(count, (month, hod), 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(count > 0, total / np.maximum(count, 1), np.nan)


# --------------------------------------------------------------------------
# SVG

_LOW = (247, 251, 255)
_HIGH = (8, 48, 107)


def _color(frac: float) -> str:
    if math.isnan(frac):
        return "#dddddd"
    c = [round(a + (b - a) * frac) for a, b in zip(_LOW, _HIGH)]
    return "#%02x%02x%02x" % tuple(c)


def heatmap_svg(grid: np.ndarray, title: str, unit: str = "MW") -> str:
    cell, left, top = 18, 40, 30
    rows, cols = grid.shape
    finite = grid[np.isfinite(grid)]
    lo = float(finite.min()) if finite.size else 0.0
    hi = float(finite.max()) if finite.size else 0.0
    span = hi - lo
    w, h = left + cols * cell + 10, top + rows * cell + 30
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           f'data-min="{lo:.6f}" data-max="{hi:.6f}">',
           f'<text x="{left}" y="18" font-size="12">{html.escape(title)} ({html.escape(unit)}, '
           f'{lo:.3f} to {hi:.3f})</text>']
    for i in range(rows):
        out.append(f'<text x="4" y="{top + i * cell + 13}" font-size="10">M{i + 1:02d}</text>')
        for j in range(cols):
            v = grid[i, j]
            frac = math.nan if not math.isfinite(v) else (0.0 if span <= 0 else (v - lo) / span)
            val = "nan" if not math.isfinite(v) else f"{v:.6f}"
            out.append(f'<rect x="{left + j * cell}" y="{top + i * cell}" width="{cell}" height="{cell}" '
                       f'fill="{_color(frac)}" data-value="{val}"/>')
    for j in range(0, cols, 3):
        out.append(f'<text x="{left + j * cell + 2}" y="{top + rows * cell + 14}" font-size="10">{j}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def line_chart_svg(series: dict[str, np.ndarray], title: str, unit: str) -> str:
    """Polylines of each series; the y axis spans [0, max over all series]."""
    width, height, left, top, bottom = 640, 260, 50, 30, 30
    T = max((len(v) for v in series.values()), default=0)
    ymax = max((float(np.max(v)) for v in series.values() if len(v)), default=0.0)
    scale_y = (height - top - bottom) / ymax if ymax > 0 else 0.0
    step = (width - left - 10) / max(T - 1, 1)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'data-ymax="{ymax!r}" data-y0="{height - bottom}" data-yscale="{scale_y!r}">',
           f'<text x="{left}" y="18" font-size="12">{html.escape(title)} ({html.escape(unit)}, '
           f'max {ymax:.3f})</text>',
           f'<line x1="{left}" y1="{height - bottom}" x2="{width - 10}" y2="{height - bottom}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>']
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
    for k, (name, v) in enumerate(series.items()):
        pts = " ".join(f"{left + i * step:.3f},{height - bottom - x * scale_y:.9f}" for i, x in enumerate(v))
        out.append(f'<polyline fill="none" stroke="{palette[k % len(palette)]}" '
                   f'data-name="{html.escape(name)}" points="{pts}"/>')
        out.append(f'<text x="{width - 150}" y="{top + 12 * k}" font-size="10" '
                   f'fill="{palette[k % len(palette)]}">{html.escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_report(run_dir: str | Path, kinds: dict[str, str] | None = None) -> list[Path]:
    """Heatmaps per device class, storage SOC chart and a cost table from a plan run directory.

    ``kinds`` maps technology id to kind and defaults to the run's ``technologies.csv``.
    """
    run_dir = Path(run_dir)
    disp_path = run_dir / "dispatch.csv"
    if not disp_path.exists():
        raise FileNotFoundError(f"{disp_path} not found; run 'plan' first")
    series = read_dispatch(disp_path)
    rep = run_dir / "report"
    rep.mkdir(exist_ok=True)
    written = []
    if kinds is None:
        kinds = {}
        tpath = run_dir / "technologies.csv"
        if tpath.exists():
            with tpath.open(newline="") as fh:
                kinds = {r["id"]: r["kind"] for r in csv.DictReader(fh)}
    for label, (qty, tech_kinds) in DEVICE_CLASSES.items():
        parts = [v for (q, _, t), v in series.items() if q == qty and kinds.get(t, t) in tech_kinds]
        if not parts:
            log.warning("no %s series for device class %s; heatmap skipped", qty, label)
            continue
        total = np.sum(parts, axis=0)
        p = rep / f"heatmap_{label}.svg"
        p.write_text(heatmap_svg(monthly_hour_means(total), f"{label} mean hourly {qty}"))
        written.append(p)
    soc = {f"{t}@{r}": v for (q, r, t), v in series.items() if q == "soc" and kinds.get(t, t) == "HS"}
    if soc:
        p = rep / "soc_HS.svg"
        p.write_text(line_chart_svg(soc, "Hydrogen storage inventory", "kg"))
        written.append(p)
    else:
        log.warning("no hydrogen storage SOC series; SOC chart skipped")
    costs = run_dir / "costs.csv"
    if costs.exists():
        with costs.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        lines = ["| component | USD |", "|---|---:|"] + [f"| {r['component']} | {float(r['usd']):,.2f} |" for r in rows]
        p = rep / "costs.md"
        p.write_text("\n".join(lines) + "\n")
        written.append(p)
    else:
        log.warning("costs.csv missing; cost table skipped")
    return written
