"""Matplotlib figures for sweep results, written next to the CSV output."""

from __future__ import annotations

import math
import os
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analysis import SweepRecord, find_peak  # noqa: E402
from .lattice import Lattice  # noqa: E402

YLABELS = {
    "concurrence": r"$C$",
    "eof": r"$E$",
    "gap": r"$E_1 - E_0$",
    "derivative": r"$dC/d\lambda$",
}


def _value(r: SweepRecord, quantity: str):
    return {"concurrence": r.C, "eof": r.E, "gap": r.gap, "derivative": r.dCdl}[quantity]


def plot_records(records: list[SweepRecord], quantity: str = "concurrence", ax=None, title: str | None = None):
    if ax is None:
        _, ax = plt.subplots(figsize=(6, 4))
    curves = defaultdict(list)
    for r in records:
        v = _value(r, quantity)
        if v is not None:
            curves[(r.alpha, r.pair)].append((r.lam, v))
    alphas = {k[0] for k in curves}
    for (alpha, (i, j)), pts in sorted(curves.items()):
        pts.sort()
        xs, ys = zip(*pts)
        label = f"({i},{j})" if len(alphas) == 1 else f"({i},{j}), $\\alpha$={alpha:g}"
        line, = ax.plot(xs, ys, label=label)
        if quantity == "derivative" and len(xs) > 2:
            pk = find_peak(xs, ys, absolute=True)
            ax.plot([pk.lam], [pk.value], "o", color=line.get_color())
            ax.annotate(f"{pk.lam:.2f}", (pk.lam, pk.value), textcoords="offset points", xytext=(4, 4))
    if quantity == "gap" and any(v > 0 for pts in curves.values() for _, v in pts):
        ax.set_yscale("log")
    ax.set_xlabel(r"$\lambda = h/J$")
    ax.set_ylabel(YLABELS[quantity])
    if title:
        ax.set_title(title)
    if curves:
        ax.legend(frameon=False, fontsize="small")
    return ax


def save_figure(records: list[SweepRecord], path: str | os.PathLike, quantity: str = "concurrence",
                title: str | None = None) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    plot_records(records, quantity, ax=ax, title=title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def _xy(coord) -> tuple[float, float]:
    q, r = coord
    return q + 0.5 * r, r * math.sqrt(3) / 2


def plot_trend_overview(lat: Lattice, trends: dict[tuple[int, int], int], ax=None):
    """Lattice diagram: impurity as a large dot, bonds coloured by the sign of the trend.

    Green bonds entangle more as the impurity strengthens, yellow ones less.
    """
    if ax is None:
        _, ax = plt.subplots(figsize=(4.5, 4.5))
    colors = {1: "tab:green", -1: "gold", 0: "0.7"}
    for b in lat.bonds:
        (x0, y0), (x1, y1) = _xy(lat.sites[b.i - 1]), _xy(lat.sites[b.j - 1])
        t = trends.get((b.i, b.j), 0)
        ax.plot([x0, x1], [y0, y1], color=colors[t], lw=3 if t else 1, zorder=1)
    for k, s in enumerate(lat.sites, start=1):
        x, y = _xy(s)
        is_imp = k == lat.impurity_site
        ax.scatter([x], [y], s=260 if is_imp else 110, color="gold" if is_imp else "silver",
                   edgecolor="k", zorder=2)
        ax.annotate(str(k), (x, y), ha="center", va="center", fontsize=8, zorder=3)
    ax.set_aspect("equal")
    ax.axis("off")
    return ax


def save_trend_overview(lat: Lattice, trends: dict[tuple[int, int], int], path: str | os.PathLike) -> Path:
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    plot_trend_overview(lat, trends, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
