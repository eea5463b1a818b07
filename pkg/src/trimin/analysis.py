"""Sweeps over the field ratio lambda = h/J and the quantities derived from them."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .entanglement import concurrence_x_state
from .hamiltonian import HamiltonianOperator, build_operator, parity_signs
from .lattice import Lattice, build_patch, center_pair
from .rdm import reduced_density_matrix
from .tracemin import EigenResult, SolverConfig, solve

log = logging.getLogger(__name__)

QUANTITIES = frozenset({"C", "E", "gap", "dCdl"})


def lambda_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive uniform grid, rounded so that 2.61 prints as 2.61."""
    if not step > 0:
        raise ValueError(f"lambda step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"lambda grid is empty: start {start} > stop {stop}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


@dataclass
class SweepSpec:
    shell_radius: int
    lambdas: Sequence[float]
    pairs: Sequence[tuple[int, int]] | None = None
    quantities: frozenset[str] = frozenset({"C", "E"})
    impurity_site: int | None = None
    alphas: Sequence[float] = (0.0,)
    J: float = 1.0
    solver: SolverConfig = field(default_factory=SolverConfig)
    warm_start: bool = True

    def __post_init__(self):
        unknown = set(self.quantities) - QUANTITIES
        if unknown:
            raise ValueError(f"unknown quantities: {sorted(unknown)}")
        lams = np.asarray(self.lambdas, dtype=float)
        if lams.size == 0 or np.any(lams < 0):
            raise ValueError("lambda grid must be non-empty and non-negative")
        if np.any(np.diff(lams) <= 0):
            raise ValueError("lambda grid must be strictly increasing")
        if "dCdl" in self.quantities and lams.size < 2:
            raise ValueError("derivatives need at least two lambda points")
        if any(a < -1 for a in self.alphas):
            raise ValueError("impurity strength alpha must be >= -1")

    def lattice(self, alpha: float = 0.0) -> Lattice:
        imp = None if self.impurity_site is None else (self.impurity_site, alpha)
        return build_patch(self.shell_radius, self.J, imp)

    def resolved_pairs(self) -> list[tuple[int, int]]:
        if self.pairs is not None:
            return [tuple(p) for p in self.pairs]
        return [center_pair(self.lattice())]


@dataclass
class SweepRecord:
    lam: float
    pair: tuple[int, int]
    C: float
    E: float
    gap: float | None = None
    dCdl: float | None = None
    alpha: float = 0.0
    converged: bool = True

    def sort_key(self):
        return (self.alpha, self.lam, self.pair[0], self.pair[1])


@dataclass(frozen=True)
class Peak:
    lam: float
    value: float
    refined_lam: float
    index: int


def even_ground_state(op: HamiltonianOperator, res: EigenResult) -> np.ndarray:
    """Lowest Ritz vector of the solver block projected onto even parity ``prod_i Z_i = +1``.

    For h > 0 the ground state is even. Near h = 0 the even and odd ground
    states are almost degenerate and the solver may return any mixture of
    them; projecting the whole block first picks out the even member.
    """
    Y = 0.5 * (res.block + parity_signs(op.n_sites)[:, None] * res.block)
    omega, V = np.linalg.eigh(Y.T @ Y)
    keep = omega > 1e-10 * omega.max()
    Q = Y @ (V[:, keep] / np.sqrt(omega[keep]))
    Hs = Q.T @ op.apply(Q)
    theta, W = np.linalg.eigh(0.5 * (Hs + Hs.T))
    psi = Q @ W[:, 0]
    e0 = res.eigenvalues[0]
    if theta[0] > e0 + 1e-6 * max(1.0, abs(e0)):
        log.warning("even-parity ground energy %.12g lies above solver ground energy %.12g", theta[0], e0)
    return psi / np.linalg.norm(psi)


def _solver_for(spec: SweepSpec) -> SolverConfig:
    cfg = spec.solver
    if "gap" in spec.quantities and cfg.n_wanted < 2:
        cfg = replace(cfg, n_wanted=2, block_size=max(cfg.block_size, 2))
    return cfg


def run_sweep(
    spec: SweepSpec,
    progress: Callable[[str], None] | None = None,
) -> list[SweepRecord]:
    """Ground-state concurrence (and optionally gap) for every (alpha, lambda, pair)."""
    pairs = spec.resolved_pairs()
    cfg = _solver_for(spec)
    want_state = bool({"C", "E", "dCdl"} & set(spec.quantities))
    want_gap = "gap" in spec.quantities
    records: list[SweepRecord] = []
    for alpha in spec.alphas:
        lat = spec.lattice(alpha)
        for a, b in pairs:
            if not (1 <= a <= lat.n_sites and 1 <= b <= lat.n_sites) or a == b:
                raise ValueError(f"pair ({a}, {b}) is not valid on a {lat.n_sites}-site patch")
        block = None
        for lam in spec.lambdas:
            lam = float(lam)
            gap = None
            converged = True
            psi = None
            if want_gap or (want_state and lam > 0):
                op = build_operator(lat, lam * spec.J)
                res = solve(op, cfg, X0=block if spec.warm_start else None)
                converged = res.converged
                if spec.warm_start:
                    block = res.block
                if want_gap:
                    gap = float(res.eigenvalues[1] - res.eigenvalues[0])
                if want_state and lam > 0:
                    psi = even_ground_state(op, res)
            for a, b in pairs:
                if psi is None:
                    # the ground doublet at lambda = 0 carries no pair entanglement
                    C = E = 0.0
                else:
                    cr = concurrence_x_state(reduced_density_matrix(psi, a, b))
                    C, E = cr.C, cr.E_of_F
                records.append(SweepRecord(lam, (a, b), C, E, gap, None, float(alpha), converged))
            if progress is not None:
                progress(f"alpha={alpha:g} lambda={lam:g} converged={converged}")
    if "dCdl" in spec.quantities:
        attach_derivatives(records)
    records.sort(key=SweepRecord.sort_key)
    return records


def _check_uniform(lams: np.ndarray) -> float:
    steps = np.diff(lams)
    if steps.size == 0:
        raise ValueError("need at least two grid points")
    if np.abs(steps - steps[0]).max() > 1e-9 * max(1.0, abs(steps[0])):
        raise ValueError("lambda grid is not uniform")
    return float(steps[0])


def derivative(lams: Sequence[float], values: Sequence[float]) -> np.ndarray:
    """Central differences inside the grid, one-sided at the two ends."""
    x = np.asarray(lams, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.size < 3:
        raise ValueError("need at least three grid points")
    h = _check_uniform(x)
    d = np.empty_like(y)
    d[1:-1] = (y[2:] - y[:-2]) / (2 * h)
    d[0] = (y[1] - y[0]) / h
    d[-1] = (y[-1] - y[-2]) / h
    return d


def derivative_curve(records: Iterable[SweepRecord]) -> list[tuple[float, float]]:
    recs = sorted(records, key=lambda r: r.lam)
    pairs = {(r.pair, r.alpha) for r in recs}
    if len(pairs) > 1:
        raise ValueError("derivative_curve expects records of a single pair and alpha")
    lams = [r.lam for r in recs]
    return list(zip(lams, derivative(lams, [r.C for r in recs]).tolist()))


def attach_derivatives(records: list[SweepRecord]) -> None:
    groups: dict[tuple, list[SweepRecord]] = {}
    for r in records:
        groups.setdefault((r.alpha, r.pair), []).append(r)
    for group in groups.values():
        group.sort(key=lambda r: r.lam)
        if len(group) < 3:
            continue
        for r, (_, d) in zip(group, derivative_curve(group)):
            r.dCdl = d


def find_peak(lams: Sequence[float], values: Sequence[float], absolute: bool = False) -> Peak:
    """Grid argmax plus a three-point parabolic refinement of its position."""
    x = np.asarray(lams, dtype=float)
    y = np.asarray(values, dtype=float)
    s = np.abs(y) if absolute else y
    k = int(np.argmax(s))
    refined = x[k]
    if 0 < k < x.size - 1:
        y0, y1, y2 = s[k - 1], s[k], s[k + 1]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            refined = x[k] + 0.5 * (x[k + 1] - x[k]) * (y0 - y2) / denom
    return Peak(lam=float(x[k]), value=float(y[k]), refined_lam=float(refined), index=k)


def concurrence_peak(records: Iterable[SweepRecord], pair: tuple[int, int], alpha: float = 0.0) -> Peak:
    recs = sorted((r for r in records if r.pair == tuple(pair) and r.alpha == alpha), key=lambda r: r.lam)
    if not recs:
        raise ValueError(f"no records for pair {pair} at alpha={alpha}")
    return find_peak([r.lam for r in recs], [r.C for r in recs])


def derivative_peak(records: Iterable[SweepRecord], pair: tuple[int, int], alpha: float = 0.0) -> Peak:
    recs = [r for r in records if r.pair == tuple(pair) and r.alpha == alpha]
    curve = derivative_curve(recs)
    return find_peak([c[0] for c in curve], [c[1] for c in curve], absolute=True)


def gap_curve(spec: SweepSpec) -> list[tuple[float, float]]:
    """E1 - E0 along the lambda grid (first alpha of the spec); needs no pairs."""
    cfg = _solver_for(replace(spec, quantities=frozenset({"gap"})))
    lat = spec.lattice(tuple(spec.alphas)[0])
    out = []
    block = None
    for lam in spec.lambdas:
        res = solve(build_operator(lat, float(lam) * spec.J), cfg, X0=block if spec.warm_start else None)
        if spec.warm_start:
            block = res.block
        if not res.converged:
            log.warning("gap at lambda=%g did not converge", lam)
        out.append((float(lam), float(res.eigenvalues[1] - res.eigenvalues[0])))
    return out


def impurity_scan(
    spec: SweepSpec,
    site: int,
    alphas: Sequence[float],
    progress: Callable[[str], None] | None = None,
) -> dict[float, list[SweepRecord]]:
    if any(a < -1 for a in alphas):
        raise ValueError("impurity strength alpha must be >= -1")
    spec = replace(spec, impurity_site=site, alphas=tuple(float(a) for a in alphas))
    out: dict[float, list[SweepRecord]] = {float(a): [] for a in alphas}
    for r in run_sweep(spec, progress):
        out[r.alpha].append(r)
    return out


def impurity_trends(groups: dict[float, list[SweepRecord]]) -> dict[tuple[int, int], int]:
    """Sign of the change of each pair's peak concurrence as alpha grows.

    +1 means the pair entangles more for a stronger impurity, -1 less, 0 flat.
    """
    alphas = sorted(groups)
    pairs = sorted({r.pair for r in groups[alphas[0]]})
    trends = {}
    for pair in pairs:
        peaks = [concurrence_peak(groups[a], pair, a).value for a in alphas]
        slope = np.polyfit(alphas, peaks, 1)[0] if len(alphas) > 1 else 0.0
        trends[pair] = int(np.sign(slope)) if abs(slope) > 1e-12 else 0
    return trends
