"""CSV output of sweep records and a matching standalone plotting script."""

from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Iterable

from .analysis import SweepRecord

CSV_HEADER = ("lambda", "site_i", "site_j", "concurrence", "eof", "gap", "dC_dlambda", "alpha", "converged")


def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    return f"{x:.12g}"


def format_row(r: SweepRecord) -> list[str]:
    return [
        _fmt(r.lam), str(r.pair[0]), str(r.pair[1]),
        _fmt(r.C), _fmt(r.E), _fmt(r.gap), _fmt(r.dCdl),
        _fmt(r.alpha), "1" if r.converged else "0",
    ]


def write_csv(records: Iterable[SweepRecord], path: str | os.PathLike) -> Path:
    """Write records sorted by (alpha, lambda, i, j); a failed write leaves no file behind."""
    path = Path(path)
    rows = sorted(records, key=SweepRecord.sort_key)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow(format_row(r))
    except BaseException:
        path.unlink(missing_ok=True)
        raise
    return path


def _opt(s: str) -> float | None:
    return float(s) if s != "" else None


def read_csv(path: str | os.PathLike) -> list[SweepRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            SweepRecord(
                lam=float(row["lambda"]),
                pair=(int(row["site_i"]), int(row["site_j"])),
                C=float(row["concurrence"]),
                E=float(row["eof"]),
                gap=_opt(row["gap"]),
                dCdl=_opt(row["dC_dlambda"]),
                alpha=float(row["alpha"]),
                converged=row["converged"] == "1",
            )
            for row in reader
        ]


_COLUMNS = {
    "concurrence": ("concurrence", "C"),
    "eof": ("eof", "E"),
    "gap": ("gap", "E_1 - E_0"),
    "derivative": ("dC_dlambda", "dC/d\\lambda"),
}


def pick_quantity(records: list[SweepRecord]) -> str:
    if any(r.dCdl is not None for r in records):
        return "derivative"
    if records and all(r.gap is not None for r in records) and all(r.C == 0 for r in records):
        return "gap"
    return "concurrence"


_SCRIPT = '''\
#!/usr/bin/env python
"""Plot {column} against lambda from {csv_name}."""
{warning}
import csv
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = {csv_path!r}
COLUMN = {column!r}
MARK_PEAKS = {mark_peaks!r}

curves = defaultdict(list)
with open(CSV_PATH, newline="") as fh:
    for row in csv.DictReader(fh):
        if row[COLUMN] == "":
            continue
        key = (float(row["alpha"]), int(row["site_i"]), int(row["site_j"]))
        curves[key].append((float(row["lambda"]), float(row[COLUMN])))

alphas = {{k[0] for k in curves}}
fig, ax = plt.subplots(figsize=(6, 4))
for (alpha, i, j), pts in sorted(curves.items()):
    pts.sort()
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    label = f"({{i}},{{j}})" if len(alphas) == 1 else f"({{i}},{{j}}) alpha={{alpha:g}}"
    line, = ax.plot(xs, ys, label=label)
    if MARK_PEAKS and ys:
        k = max(range(len(ys)), key=lambda n: abs(ys[n]))
        ax.plot([xs[k]], [ys[k]], "o", color=line.get_color())
        ax.annotate(f"{{xs[k]:.2f}}", (xs[k], ys[k]), textcoords="offset points", xytext=(4, 4))
ax.set_xlabel(r"$\\lambda = h/J$")
ax.set_ylabel(r"${ylabel}$")
if curves:
    ax.legend(frameon=False)
fig.tight_layout()
fig.savefig({png_path!r}, dpi=150)
'''


def emit_plot_script(csv_path: str | os.PathLike, quantity: str = "auto") -> str:
    """Text of a self-contained matplotlib script that plots the CSV, one curve per pair/alpha."""
    csv_path = Path(csv_path)
    if not csv_path.is_file():
        raise FileNotFoundError(f"no such CSV file: {csv_path}")
    records = read_csv(csv_path)
    if quantity == "auto":
        quantity = pick_quantity(records)
    if quantity not in _COLUMNS:
        raise ValueError(f"unknown quantity {quantity!r}")
    column, ylabel = _COLUMNS[quantity]
    warning = "" if records else f"\n# WARNING: {csv_path.name} has no data rows; the plot will be empty.\n"
    return _SCRIPT.format(
        column=column,
        csv_name=csv_path.name,
        csv_path=str(csv_path),
        warning=warning,
        mark_peaks=quantity == "derivative",
        ylabel=ylabel,
        png_path=str(csv_path.with_suffix(".png")),
    )
