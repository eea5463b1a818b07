"""Command-line front end: sweeps, derivatives, gaps, impurity scans, verification.

Every data-producing command writes ``<stem>.csv``, a standalone plotting
script ``<stem>_plot.py`` and a rendered ``<stem>.png`` into the output
directory (``--outdir``, else ``$TRIMIN_OUTDIR``, else ``./results``).

Exit status: 0 success, 1 usage error, 2 numerical or I/O failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .analysis import (
    SweepRecord, SweepSpec, concurrence_peak, derivative_peak, impurity_trends, lambda_grid, run_sweep,
)
from .entanglement import InvalidDensityMatrix
from .hamiltonian import ResourceError
from .lattice import build_patch, nearest_pairs
from .plotting import save_figure, save_trend_overview
from .report import emit_plot_script, write_csv
from .tracemin import SolverConfig, SolverError

log = logging.getLogger("trimin")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3
OUTDIR_ENV = "TRIMIN_OUTDIR"
FIGURES = tuple(f"fig{k}" for k in range(1, 10))

QUANTITIES = {
    "sweep": frozenset({"C", "E"}),
    "derivative": frozenset({"C", "E", "dCdl"}),
    "gap": frozenset({"C", "E", "gap"}),
    "impurity": frozenset({"C", "E"}),
}
PLOTTED = {"sweep": "concurrence", "derivative": "derivative", "gap": "gap", "impurity": "concurrence"}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    target: str | None = None
    shell: int = 1
    pairs: tuple[tuple[int, int], ...] | str | None = None
    lam: tuple[float, float, float] = (0.0, 6.0, 0.01)
    J: float = 1.0
    site: int | None = None
    alphas: tuple[float, ...] = (0.0, 0.5, 1.0)
    block_size: int = 4
    n_wanted: int = 1
    outer_tol: float = 1e-10
    inner_tol: float = 1e-2
    max_outer: int = 500
    max_inner: int = 200
    seed: int = 0
    shift: float | str = "auto"
    cold: bool = False
    instances: int = 200
    output: str | None = None
    outdir: str | None = None
    plot: bool = True
    verbose: bool = False

    def solver(self) -> SolverConfig:
        return SolverConfig(
            block_size=self.block_size, n_wanted=self.n_wanted, outer_tol=self.outer_tol,
            inner_rel_tol=self.inner_tol, max_outer=self.max_outer, max_inner=self.max_inner,
            seed=self.seed, shift=self.shift,
        )

    def resolved_outdir(self) -> Path:
        return Path(self.outdir or os.environ.get(OUTDIR_ENV) or "results")

    def to_argv(self) -> list[str]:
        """Argument list that parses back to an equal config."""
        argv = [self.command]
        if self.target is not None:
            argv.append(self.target)
        argv += ["--shell", str(self.shell)]
        if self.pairs == "all":
            argv += ["--pair", "all"]
        elif self.pairs is not None:
            for i, j in self.pairs:
                argv += ["--pair", f"{i},{j}"]
        argv += ["--lambda", ":".join(repr(float(x)) for x in self.lam)]
        argv += ["--J", repr(self.J)]
        if self.site is not None:
            argv += ["--site", str(self.site)]
        argv += ["--alpha", ",".join(repr(float(a)) for a in self.alphas)]
        argv += [
            "--block-size", str(self.block_size), "--n-wanted", str(self.n_wanted),
            "--outer-tol", repr(self.outer_tol), "--inner-tol", repr(self.inner_tol),
            "--max-outer", str(self.max_outer), "--max-inner", str(self.max_inner),
            "--seed", str(self.seed), "--shift", str(self.shift) if self.shift == "auto" else repr(self.shift),
            "--instances", str(self.instances),
        ]
        if self.cold:
            argv.append("--cold")
        if self.output is not None:
            argv += ["--output", self.output]
        if self.outdir is not None:
            argv += ["--outdir", self.outdir]
        if not self.plot:
            argv.append("--no-plot")
        if self.verbose:
            argv.append("--verbose")
        return argv


# -- argument parsing --------------------------------------------------------

def _pair(text: str):
    if text == "all":
        return "all"
    try:
        i, j = (int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected i,j or 'all', got {text!r}") from None
    if i == j or min(i, j) < 1:
        raise argparse.ArgumentTypeError(f"pair needs two distinct positive sites, got {text!r}")
    return (min(i, j), max(i, j))


def _lambda(text: str):
    try:
        start, stop, step = (float(s) for s in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from None
    if not step > 0 or stop < start or start < 0:
        raise argparse.ArgumentTypeError(f"need 0 <= start <= stop and step > 0, got {text!r}")
    return (start, stop, step)


def _alphas(text: str):
    try:
        vals = tuple(float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if any(a < -1 for a in vals):
        raise argparse.ArgumentTypeError("impurity strengths must be >= -1")
    return vals


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _tol(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"tolerance must lie in (0, 1), got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {v}")
    return v


def _shift(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("lattice and sweep")
    g.add_argument("--shell", type=_nonneg_int, default=1, help="patch shell radius: 1 -> 7 sites, 2 -> 19 sites")
    g.add_argument("--pair", type=_pair, action="append", dest="pairs", metavar="I,J",
                   help="site pair (repeatable) or 'all' for every bond; default is the centre pair")
    g.add_argument("--lambda", type=_lambda, dest="lam", default=(0.0, 6.0, 0.01), metavar="START:STOP:STEP",
                   help="inclusive grid of h/J (default 0:6:0.01)")
    g.add_argument("--J", type=_positive_float, default=1.0, help="exchange coupling (default 1)")
    g.add_argument("--site", type=_positive_int, help="impurity site")
    g.add_argument("--alpha", type=_alphas, dest="alphas", default=(0.0, 0.5, 1.0), metavar="A,B,..",
                   help="impurity strengths (default 0,0.5,1)")
    s = common.add_argument_group("solver")
    s.add_argument("--block-size", type=_positive_int, default=4)
    s.add_argument("--n-wanted", type=_positive_int, default=1)
    s.add_argument("--outer-tol", type=_tol, default=1e-10, help="relative residual target (default 1e-10)")
    s.add_argument("--inner-tol", type=_tol, default=1e-2, help="relative CG tolerance (default 1e-2)")
    s.add_argument("--max-outer", type=_positive_int, default=500)
    s.add_argument("--max-inner", type=_positive_int, default=200)
    s.add_argument("--seed", type=_nonneg_int, default=0)
    s.add_argument("--shift", type=_shift, default="auto", help="solver shift sigma, or 'auto' (Gershgorin)")
    s.add_argument("--cold", action="store_true", help="no warm start between lambda points")
    o = common.add_argument_group("output")
    o.add_argument("--instances", type=_positive_int, default=200, help="random instances for verify")
    o.add_argument("--output", help="CSV path (single-sweep commands)")
    o.add_argument("--outdir", help=f"output directory (default ${OUTDIR_ENV} or ./results)")
    o.add_argument("--no-plot", dest="plot", action="store_false", help="skip the PNG rendering")
    o.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="trimin", description="Ground-state entanglement of the transverse-field "
                     "Ising model on triangular patches.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("sweep", parents=[common], help="concurrence and EoF along lambda")
    sub.add_parser("derivative", parents=[common], help="dC/dlambda and its peak")
    sub.add_parser("gap", parents=[common], help="E1 - E0 along lambda")
    sub.add_parser("impurity", parents=[common], help="sweeps for several impurity strengths")
    sub.add_parser("verify", parents=[common], help="randomized checks against dense references")
    rp = sub.add_parser("reproduce", parents=[common], help="canned runs for the figure set")
    rp.add_argument("target", choices=FIGURES + ("all",))
    return parser


def parse_args(argv: list[str] | None = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    pairs = ns.pairs
    if pairs is not None:
        if "all" in pairs:
            if len(pairs) > 1:
                raise UsageError("trimin: error: argument --pair: 'all' cannot be combined with explicit pairs")
            pairs = "all"
        else:
            pairs = tuple(pairs)
    if ns.n_wanted > ns.block_size:
        raise UsageError("trimin: error: argument --n-wanted: must not exceed --block-size")
    if ns.command == "impurity" and ns.site is None:
        raise UsageError("trimin: error: argument --site: required for impurity scans")
    return RunConfig(
        command=ns.command, target=getattr(ns, "target", None), shell=ns.shell, pairs=pairs,
        lam=ns.lam, J=ns.J, site=ns.site, alphas=ns.alphas, block_size=ns.block_size,
        n_wanted=ns.n_wanted, outer_tol=ns.outer_tol, inner_tol=ns.inner_tol,
        max_outer=ns.max_outer, max_inner=ns.max_inner, seed=ns.seed, shift=ns.shift,
        cold=ns.cold, instances=ns.instances, output=ns.output, outdir=ns.outdir,
        plot=ns.plot, verbose=ns.verbose,
    )


# -- execution ---------------------------------------------------------------

def sweep_spec(cfg: RunConfig) -> SweepSpec:
    lat = build_patch(cfg.shell, cfg.J)
    if cfg.pairs == "all":
        pairs = nearest_pairs(lat)
    elif cfg.pairs is None and cfg.command == "impurity":
        pairs = nearest_pairs(lat)
    else:
        pairs = cfg.pairs
    impurity = cfg.site if cfg.command == "impurity" else None
    if impurity is not None and impurity > lat.n_sites:
        raise ValueError(f"site out of range: {impurity} (lattice has {lat.n_sites} sites)")
    return SweepSpec(
        shell_radius=cfg.shell,
        lambdas=lambda_grid(*cfg.lam),
        pairs=pairs,
        quantities=QUANTITIES[cfg.command],
        impurity_site=impurity,
        alphas=cfg.alphas if impurity is not None else (0.0,),
        J=cfg.J,
        solver=cfg.solver(),
        warm_start=not cfg.cold,
    )


def default_stem(cfg: RunConfig) -> str:
    n = build_patch(cfg.shell).n_sites
    stem = f"{cfg.command}_{n}site"
    if cfg.command == "impurity":
        stem += f"_site{cfg.site}"
    return stem


def _plot_subset(cfg: RunConfig, records: list[SweepRecord]) -> list[SweepRecord]:
    # an impurity scan over every bond is unreadable as one plot; show the bonds at the impurity
    if cfg.command == "impurity" and cfg.pairs is None:
        keep = [r for r in records if cfg.site in r.pair]
        return keep or records
    return records


def write_outputs(records, csv_path: Path, quantity: str, plot: bool, title: str | None = None,
                  plot_records: list[SweepRecord] | None = None) -> None:
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(records, csv_path)
    script = csv_path.with_name(csv_path.stem + "_plot.py")
    script.write_text(emit_plot_script(csv_path, quantity))
    if plot:
        save_figure(plot_records if plot_records is not None else records,
                    csv_path.with_suffix(".png"), quantity, title)
    log.info("wrote %s", csv_path)


def _report_peaks(cfg: RunConfig, records: list[SweepRecord]) -> None:
    seen = sorted({(r.alpha, r.pair) for r in records})
    for alpha, pair in seen:
        pk = concurrence_peak(records, pair, alpha)
        line = f"pair {pair[0]},{pair[1]} alpha {alpha:g}: max C {pk.value:.6f} at lambda {pk.lam:g}"
        if cfg.command == "derivative":
            dp = derivative_peak(records, pair, alpha)
            line += f"; max |dC/dlambda| {abs(dp.value):.4f} at lambda {dp.lam:g} (refined {dp.refined_lam:.4f})"
        print(line)


def run_single(cfg: RunConfig) -> int:
    spec = sweep_spec(cfg)
    progress = log.debug if not cfg.verbose else log.info
    records = run_sweep(spec, progress)
    outdir = cfg.resolved_outdir()
    csv_path = Path(cfg.output) if cfg.output else outdir / f"{default_stem(cfg)}.csv"
    write_outputs(records, csv_path, PLOTTED[cfg.command], cfg.plot,
                  plot_records=_plot_subset(cfg, records))
    if cfg.command == "impurity" and len(spec.alphas) > 1:
        groups: dict[float, list[SweepRecord]] = {}
        for r in records:
            groups.setdefault(r.alpha, []).append(r)
        trends = impurity_trends(groups)
        for (i, j), t in sorted(trends.items()):
            print(f"pair {i},{j}: {'increases' if t > 0 else 'decreases' if t < 0 else 'flat'} with alpha")
        if cfg.plot:
            save_trend_overview(spec.lattice(spec.alphas[-1]), trends,
                                csv_path.with_name(csv_path.stem + "_trends.png"))
    if cfg.command != "gap":
        _report_peaks(cfg, records)
    bad = sum(not r.converged for r in records)
    if bad:
        log.warning("%d records did not converge and are flagged in the CSV", bad)
    print(f"wrote {csv_path}")
    return EXIT_OK


# canned runs: figure -> list of (stem, partial config)
CANNED: dict[str, list[tuple[str, dict]]] = {
    "fig1": [
        ("fig1_7site", dict(command="sweep", shell=1, lam=(0.0, 6.0, 0.01))),
        ("fig1_19site", dict(command="sweep", shell=2, lam=(0.0, 6.0, 0.05))),
    ],
    "fig2": [
        ("fig2_7site", dict(command="sweep", shell=1, pairs=((1, 2), (1, 4)), lam=(0.0, 6.0, 0.01))),
        ("fig2_19site", dict(command="sweep", shell=2, pairs=((1, 2), (2, 5), (5, 6), (5, 10)),
                             lam=(0.0, 6.0, 0.05))),
    ],
    "fig3": [
        ("fig3_7site", dict(command="derivative", shell=1, lam=(0.0, 6.0, 0.01))),
        ("fig3_19site", dict(command="derivative", shell=2, lam=(2.5, 3.5, 0.01))),
    ],
    "fig4": [
        ("fig4_7site", dict(command="gap", shell=1, lam=(0.0, 6.0, 0.05))),
        ("fig4_19site", dict(command="gap", shell=2, lam=(0.0, 6.0, 0.1))),
    ],
    "fig5": [("fig5_7site_site4", dict(command="impurity", shell=1, site=4, lam=(0.0, 6.0, 0.02)))],
    "fig6": [("fig6_19site_site10", dict(command="impurity", shell=2, site=10, lam=(0.0, 6.0, 0.1)))],
    "fig7": [("fig7_7site_site1", dict(command="impurity", shell=1, site=1, lam=(0.0, 6.0, 0.02)))],
    "fig8": [("fig8_19site_site5", dict(command="impurity", shell=2, site=5, lam=(0.0, 6.0, 0.1)))],
    "fig9": [
        ("fig9_7site_site4", dict(command="impurity", shell=1, site=4, pairs="all", lam=(0.0, 6.0, 0.05))),
        ("fig9_7site_site1", dict(command="impurity", shell=1, site=1, pairs="all", lam=(0.0, 6.0, 0.05))),
    ],
}


def canned_configs(cfg: RunConfig) -> list[RunConfig]:
    targets = FIGURES if cfg.target == "all" else (cfg.target,)
    outdir = str(cfg.resolved_outdir())
    out = []
    for t in targets:
        for stem, overrides in CANNED[t]:
            overrides = {"pairs": None, **overrides}
            out.append(replace(cfg, target=None, output=str(Path(outdir) / f"{stem}.csv"), **overrides))
    return out


def run_reproduce(cfg: RunConfig) -> int:
    for job in canned_configs(cfg):
        log.info("running %s", " ".join(job.to_argv()))
        run_single(job)
    return EXIT_OK


def run_verify(cfg: RunConfig) -> int:
    from .verify import run_verification

    ok = run_verification(cfg.instances, cfg.seed)
    return EXIT_OK if ok else EXIT_VERIFY


def execute(cfg: RunConfig) -> int:
    if cfg.command == "verify":
        return run_verify(cfg)
    if cfg.command == "reproduce":
        return run_reproduce(cfg)
    return run_single(cfg)


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return EXIT_OK if not e.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if cfg.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return execute(cfg)
    except (SolverError, ResourceError, InvalidDensityMatrix, ArithmeticError, OSError) as e:
        print(f"trimin: failed: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as e:
        print(f"trimin: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
