"""CSV, markdown and SVG renderings of benchmark results.

Every writer formats numbers explicitly so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from .bench import Aggregate, RunRecord, aggregate

RAW_HEADER = ("task", "d", "kernel", "sigma", "seed", "accuracy", "n_test")
AGG_HEADER = ("task", "d", "kernel", "sigma", "mean_accuracy", "std_accuracy", "n_seeds")
KERNEL_LABELS = {"rbf": "RBF-SVC", "quantum": "QSVC"}
TASK_LABELS = {"uav": "UAV, 3-class", "fall": "Fall, 2-class"}
SERIES_COLOURS = {"rbf": "#1f77b4", "quantum": "#d62728"}
FORMATS = ("csv", "markdown", "svg")


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def raw_csv(records) -> str:
    return _csv_text(
        RAW_HEADER,
        ([r.task, r.d, r.kernel, repr(r.sigma), r.seed, repr(r.accuracy), r.n_test] for r in records),
    )


def aggregate_csv(aggs) -> str:
    return _csv_text(
        AGG_HEADER,
        (
            [
                g.task,
                g.d,
                g.kernel,
                repr(g.sigma),
                f"{g.mean_accuracy:.6f}",
                "" if g.std_accuracy is None else f"{g.std_accuracy:.6f}",
                g.n_seeds,
            ]
            for g in aggs
        ),
    )


def read_raw_csv(path) -> list[RunRecord]:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != RAW_HEADER:
            raise ValueError(f"{path}: expected header {','.join(RAW_HEADER)}")
        records = []
        for lineno, row in enumerate(reader, 2):
            if len(row) != len(RAW_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(RAW_HEADER)} fields")
            task, d, kernel, sigma, seed, acc, n_test = row
            records.append(RunRecord(task, int(d), kernel, float(sigma), int(seed), float(acc), int(n_test)))
    return records


def _cell(aggs, task, d, kernel, sigma=0.0):
    for g in aggs:
        if (g.task, g.d, g.kernel, g.sigma) == (task, d, kernel, sigma):
            return g
    return None


def _fmt_mean_std(g) -> str:
    if g is None:
        return "-"
    if g.std_accuracy is None:
        return f"{g.mean_accuracy:.3f}"
    return f"{g.mean_accuracy:.3f} ± {g.std_accuracy:.3f}"


def clean_table_markdown(aggs) -> str:
    """Rows are PCA dimensions; columns are (task, kernel) pairs; the better mean per task is bold."""
    tasks = [t for t in ("uav", "fall") if any(g.task == t for g in aggs)]
    kernels = [k for k in ("rbf", "quantum") if any(g.kernel == k for g in aggs)]
    dims = sorted({g.d for g in aggs if g.sigma == 0.0})
    head = ["d"] + [f"{TASK_LABELS.get(t, t)} {KERNEL_LABELS.get(k, k)}" for t in tasks for k in kernels]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for d in dims:
        row = [str(d)]
        for t in tasks:
            cells = [_cell(aggs, t, d, k) for k in kernels]
            means = [c.mean_accuracy for c in cells if c is not None]
            best = max(means) if len(means) > 1 else None
            for c in cells:
                text = _fmt_mean_std(c)
                if best is not None and c is not None and c.mean_accuracy == best:
                    text = f"**{text}**"
                row.append(text)
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def noise_table_markdown(aggs) -> str:
    """One row per (task, d); each cell is ``rbf/quantum`` mean accuracy at a noise level."""
    sigmas = sorted({g.sigma for g in aggs})
    noisy_dims = sorted({(g.task, g.d) for g in aggs if g.sigma > 0})
    head = ["Task", "d"] + [f"σ={s:.2f}" for s in sigmas]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for task in ("uav", "fall"):
        for t, d in noisy_dims:
            if t != task:
                continue
            row = [TASK_LABELS.get(task, task), str(d)]
            for s in sigmas:
                r, q = _cell(aggs, task, d, "rbf", s), _cell(aggs, task, d, "quantum", s)
                rt = "-" if r is None else f"{r.mean_accuracy:.3f}"
                qt = "-" if q is None else f"{q.mean_accuracy:.3f}"
                if r is not None and q is not None:
                    if r.mean_accuracy > q.mean_accuracy:
                        rt = f"**{rt}**"
                    elif q.mean_accuracy > r.mean_accuracy:
                        qt = f"**{qt}**"
                row.append(f"{rt}/{qt}")
            lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def markdown_report(aggs) -> str:
    parts = ["## Clean test accuracy (mean ± std over seeds)\n", clean_table_markdown(aggs)]
    if any(g.sigma > 0 for g in aggs):
        parts += ["\n## Test-time noise (RBF-SVC/QSVC mean accuracy)\n", noise_table_markdown(aggs)]
    return "".join(parts)


# --- SVG --------------------------------------------------------------------


def ci_halfwidth(g: Aggregate) -> float:
    """Normal-approximation 95% interval half-width ``1.96 std / sqrt(n)``."""
    if g.std_accuracy is None or g.n_seeds < 2:
        return 0.0
    return 1.96 * g.std_accuracy / math.sqrt(g.n_seeds)


def _f(x: float) -> str:
    return f"{x:.2f}"


def svg_line_plot(series: dict, x_values, title: str, x_label: str, y_label: str = "accuracy") -> str:
    """``series`` maps a kernel name to a list of ``(x, mean, halfwidth)`` points."""
    width, height = 480, 320
    left, right, top, bottom = 60, 20, 36, 48
    pw, ph = width - left - right, height - top - bottom

    xs = list(x_values)
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    lows = [m - h for pts in series.values() for _, m, h in pts]
    highs = [m + h for pts in series.values() for _, m, h in pts]
    y_lo = max(0.0, math.floor((min(lows, default=0.0) - 0.02) * 20) / 20)
    y_hi = min(1.0, math.ceil((max(highs, default=1.0) + 0.02) * 20) / 20)
    if y_hi <= y_lo:
        y_lo, y_hi = max(0.0, y_lo - 0.05), min(1.0, y_hi + 0.05)

    def px(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return top + (1 - (y - y_lo) / (y_hi - y_lo)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.2f}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for x in xs:
        out.append(f'<line x1="{_f(px(x))}" y1="{top + ph}" x2="{_f(px(x))}" y2="{top + ph + 5}" stroke="black"/>')
        label = f"{x:g}"
        out.append(
            f'<text x="{_f(px(x))}" y="{top + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{label}</text>'
        )
    n_ticks = 5
    for k in range(n_ticks + 1):
        y = y_lo + (y_hi - y_lo) * k / n_ticks
        out.append(f'<line x1="{left - 5}" y1="{_f(py(y))}" x2="{left}" y2="{_f(py(y))}" stroke="black"/>')
        out.append(
            f'<text x="{left - 8}" y="{_f(py(y) + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">{y:.2f}</text>'
        )
    out.append(
        f'<text x="{left + pw / 2:.2f}" y="{height - 10}" text-anchor="middle" font-family="sans-serif" font-size="12">{x_label}</text>'
    )
    out.append(
        f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {top + ph / 2:.2f})">{y_label}</text>'
    )
    for idx, (name, pts) in enumerate(series.items()):
        colour = SERIES_COLOURS.get(name, "#333333")
        coords = " ".join(f"{_f(px(x))},{_f(py(m))}" for x, m, _ in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{colour}" stroke-width="2"/>')
        for x, m, h in pts:
            cx = px(x)
            if h > 0:
                out.append(
                    f'<line x1="{_f(cx)}" y1="{_f(py(m - h))}" x2="{_f(cx)}" y2="{_f(py(m + h))}" stroke="{colour}"/>'
                )
                for yy in (m - h, m + h):
                    out.append(
                        f'<line x1="{_f(cx - 4)}" y1="{_f(py(yy))}" x2="{_f(cx + 4)}" y2="{_f(py(yy))}" stroke="{colour}"/>'
                    )
            out.append(f'<circle cx="{_f(cx)}" cy="{_f(py(m))}" r="3.5" fill="{colour}"/>')
        ly = top + 14 + 16 * idx
        out.append(f'<line x1="{left + 10}" y1="{ly}" x2="{left + 30}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(
            f'<text x="{left + 36}" y="{ly + 4}" font-family="sans-serif" font-size="11">{KERNEL_LABELS.get(name, name)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def accuracy_vs_d_svg(aggs, task: str) -> str:
    cells = [g for g in aggs if g.task == task and g.sigma == 0.0]
    dims = sorted({g.d for g in cells})
    series = {}
    for k in ("rbf", "quantum"):
        pts = [(g.d, g.mean_accuracy, ci_halfwidth(g)) for g in sorted(cells, key=lambda g: g.d) if g.kernel == k]
        if pts:
            series[k] = pts
    return svg_line_plot(series, dims, f"{TASK_LABELS.get(task, task)}: accuracy vs PCA dimension", "PCA dimension d")


def accuracy_vs_sigma_svg(aggs, task: str, d: int) -> str:
    cells = [g for g in aggs if g.task == task and g.d == d]
    sigmas = sorted({g.sigma for g in cells})
    series = {}
    for k in ("rbf", "quantum"):
        pts = [(g.sigma, g.mean_accuracy, ci_halfwidth(g)) for g in sorted(cells, key=lambda g: g.sigma) if g.kernel == k]
        if pts:
            series[k] = pts
    return svg_line_plot(series, sigmas, f"{TASK_LABELS.get(task, task)}, d={d}: accuracy vs noise", "noise level sigma")


def emit_report(out_dir, records=None, aggs=None, formats=FORMATS, write_raw: bool = True) -> list[Path]:
    """Write raw/aggregate CSVs, markdown tables and SVG plots; returns the written paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if aggs is None:
        if records is None:
            raise ValueError("need records or aggregates")
        aggs = aggregate(records)
    unknown = set(formats) - set(FORMATS)
    if unknown:
        raise ValueError(f"unknown report formats: {sorted(unknown)}")
    written = []
    if "csv" in formats:
        if records is not None and write_raw:
            written.append(_write(out / "raw.csv", raw_csv(records)))
        written.append(_write(out / "aggregate.csv", aggregate_csv(aggs)))
    if "markdown" in formats:
        written.append(_write(out / "tables.md", markdown_report(aggs)))
    if "svg" in formats:
        for task in ("uav", "fall"):
            if not any(g.task == task for g in aggs):
                continue
            written.append(_write(out / f"accuracy_vs_d_{task}.svg", accuracy_vs_d_svg(aggs, task)))
            for d in sorted({g.d for g in aggs if g.task == task and g.sigma > 0}):
                written.append(_write(out / f"accuracy_vs_sigma_{task}_d{d}.svg", accuracy_vs_sigma_svg(aggs, task, d)))
    return written
