"""Block trace-minimization eigensolver for the lowest eigenpairs of a symmetric operator.

Minimizing ``Tr(X^T A X)`` over orthonormal ``n x p`` blocks ``X`` yields the
invariant subspace of the ``p`` smallest eigenvalues. One outer iteration:

1. Ritz section: orthonormalize the block through the spectral decomposition
   of its Gram matrix and rotate it onto Ritz vectors ``Xbar`` with
   ``Xbar^T A Xbar = diag(theta)``.
2. Correction: solve ``(I-P)(A - mu)(I-P) D = (I-P) A Xbar`` column by
   column with projected conjugate gradients, where ``P = Xbar Xbar^T``.
   The system is solved only to a fixed relative accuracy.
3. ``X <- Xbar - D``.

Every CG partial solution lowers the trace as long as ``A - mu`` is positive
definite on ``Range(P)^perp``. A spin Hamiltonian is indefinite, so the safe
shift ``mu`` sits one unit below the Gershgorin lower bound. Once a Ritz pair
is reasonably accurate its column switches to the shift ``theta - |r|``,
which turns the slow subspace-iteration rate into fast local convergence.
A CG step with non-positive curvature, or a trace increase, sends the solver
back to the safe shift.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, TextIO

import numpy as np
from numba import njit

log = logging.getLogger(__name__)

ORTHO_TOL = 1e-12
RANK_TOL = 1e-12


class SolverError(RuntimeError):
    pass


@dataclass
class SolverConfig:
    block_size: int = 4
    n_wanted: int = 1
    outer_tol: float = 1e-10
    inner_rel_tol: float = 1e-2
    max_outer: int = 500
    max_inner: int = 200
    seed: int = 0
    shift: float | str = "auto"
    # residual level (relative) below which a column uses its Ritz-value shift
    dynamic_shift_trigger: float | None = 1e-2

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError("block_size must be positive")
        if not 0 < self.n_wanted <= self.block_size:
            raise ValueError("need 0 < n_wanted <= block_size")
        for name in ("outer_tol", "inner_rel_tol"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.shift != "auto" and not isinstance(self.shift, (int, float)):
            raise ValueError(f"shift must be a number or 'auto', got {self.shift!r}")


@dataclass
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norms: np.ndarray
    outer_iterations: int
    converged: bool
    block: np.ndarray
    ritz_values: np.ndarray
    trace_history: list[float] = field(default_factory=list)
    matvecs: int = 0
    shift: float = 0.0


@dataclass
class RitzSection:
    Q: np.ndarray
    theta: np.ndarray
    W: np.ndarray
    X: np.ndarray
    AX: np.ndarray
    repaired: bool = False


@dataclass
class Correction:
    D: np.ndarray
    iterations: int
    breakdown: np.ndarray
    max_projection_error: float


class _BlockOperator:
    """Uniform view of dense arrays and matrix-free operators."""

    def __init__(self, op):
        self.matvecs = 0
        if isinstance(op, np.ndarray):
            if op.ndim != 2 or op.shape[0] != op.shape[1]:
                raise ValueError(f"operator must be square, got {op.shape}")
            self._apply = op.__matmul__
            self.dim = op.shape[0]
            radius = np.abs(op).sum(axis=1) - np.abs(np.diag(op))
            self.lower_bound = float((np.diag(op) - radius).min())
        elif hasattr(op, "apply"):
            self._apply = op.apply
            self.dim = op.shape[0]
            self.lower_bound = op.gershgorin_bounds()[0] if hasattr(op, "gershgorin_bounds") else None
        else:
            raise TypeError(f"unsupported operator type {type(op).__name__}")

    def __call__(self, Y: np.ndarray) -> np.ndarray:
        self.matvecs += Y.shape[1] if Y.ndim == 2 else 1
        out = self._apply(Y)
        if not np.all(np.isfinite(out)):
            raise SolverError("operator produced non-finite values")
        return out


def _as_operator(op) -> _BlockOperator:
    return op if isinstance(op, _BlockOperator) else _BlockOperator(op)


def _coldot(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->j", A, B)


def _project_out(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return Y - X @ (X.T @ Y)


def _repair_rank(X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Replace linearly dependent columns by fresh random directions."""
    X = X.copy()
    basis = []
    for c in range(X.shape[1]):
        v = X[:, c].copy()
        scale = np.linalg.norm(v)
        for b in basis:
            v -= b * (b @ v)
        if scale == 0 or np.linalg.norm(v) < 1e-6 * scale:
            v = rng.standard_normal(X.shape[0])
            for _ in range(2):
                for b in basis:
                    v -= b * (b @ v)
            X[:, c] = v / np.linalg.norm(v)
        basis.append(v / np.linalg.norm(v))
    return X


def _gram_orthonormalize(X: np.ndarray) -> tuple[np.ndarray, bool]:
    G = X.T @ X
    omega, V = np.linalg.eigh(G)
    if omega.min() <= RANK_TOL * omega.max():
        return X, False
    return X @ (V / np.sqrt(omega)), True


def ritz_section(op, X: np.ndarray, rng: np.random.Generator | None = None) -> RitzSection:
    """Orthonormalize ``X`` via ``G = X^T X = V Omega V^T`` and rotate onto Ritz vectors."""
    A = _as_operator(op)
    rng = rng if rng is not None else np.random.default_rng(0)
    repaired = False
    Q, ok = _gram_orthonormalize(X)
    if not ok:
        log.debug("rank-deficient block, replacing dependent columns")
        repaired = True
        Q, ok = _gram_orthonormalize(_repair_rank(X, rng))
        if not ok:
            raise SolverError("could not repair rank-deficient block")
    # a second pass cleans up what a badly conditioned Gram matrix leaves behind
    if np.abs(Q.T @ Q - np.eye(Q.shape[1])).max() > ORTHO_TOL:
        Q, _ = _gram_orthonormalize(Q)
    AQ = A(Q)
    Hs = Q.T @ AQ
    theta, W = np.linalg.eigh(0.5 * (Hs + Hs.T))
    return RitzSection(Q=Q, theta=theta, W=W, X=Q @ W, AX=AQ @ W, repaired=repaired)


def correction_step(
    op,
    Xbar: np.ndarray,
    AXbar: np.ndarray | None = None,
    theta: np.ndarray | None = None,
    shifts: np.ndarray | float = 0.0,
    inner_rel_tol: float = 1e-2,
    max_inner: int = 200,
    active: np.ndarray | None = None,
) -> Correction:
    """Inexact projected-CG solve of ``(I-P)(A - mu)(I-P) D = (I-P) A Xbar``.

    ``Xbar`` must be orthonormal. Columns not flagged ``active`` get ``D = 0``.
    Each operator product is projected onto ``Range(P)^perp``; the residual is
    re-projected whenever its component along ``Xbar`` exceeds 1e-12 of its norm.
    """
    A = _as_operator(op)
    n, p = Xbar.shape
    if AXbar is None:
        AXbar = A(Xbar)
    mu = np.broadcast_to(np.asarray(shifts, dtype=float), (p,)).copy()
    active = np.ones(p, dtype=bool) if active is None else np.asarray(active, dtype=bool).copy()

    # (I-P)(A - mu) Xbar = (I-P) A Xbar since (I-P) Xbar = 0
    R = np.ascontiguousarray(_project_out(Xbar, AXbar))
    D = np.zeros_like(R)
    rr = _coldot(R, R)
    target = (inner_rel_tol**2) * rr
    active &= rr > 0
    S = R.copy()
    breakdown = np.zeros(p, dtype=bool)
    max_proj = 0.0
    it = 0
    for it in range(1, max_inner + 1):
        cols = np.flatnonzero(active & (rr > target))
        if cols.size == 0:
            it -= 1
            break
        Sa = S if cols.size == p else S[:, cols]
        KS = np.ascontiguousarray(A(Sa))
        # S is orthogonal to Xbar, so the curvature needs no projection of KS
        curv = _shift_and_curvature(KS, S, cols, mu)
        bad = curv <= 0
        if np.any(bad):
            breakdown[cols[bad]] = True
            active[cols[bad]] = False
            continue
        KS = np.ascontiguousarray(_project_out(Xbar, KS))
        alpha = rr[cols] / curv
        rr_new = _cg_update(D, R, S, KS, cols, alpha)
        # r stays in Range(P)^perp up to round-off; re-project only if it drifts
        leak = np.abs(Xbar.T @ R[:, cols]).max(axis=0) / np.sqrt(np.where(rr_new > 0, rr_new, 1.0))
        max_proj = max(max_proj, float(leak.max()))
        if leak.max() > 1e-12:
            R[:, cols] = _project_out(Xbar, R[:, cols])
            rr_new = _coldot(R[:, cols], R[:, cols])
        beta = rr_new / rr[cols]
        rr[cols] = rr_new
        _direction_update(S, R, cols, beta)
    return Correction(D=D, iterations=it, breakdown=breakdown, max_projection_error=max_proj)


@njit(cache=True)
def _shift_and_curvature(KS, S, cols, mu):
    n, k = KS.shape
    curv = np.zeros(k)
    for t in range(n):
        for a in range(k):
            c = cols[a]
            v = KS[t, a] - mu[c] * S[t, c]
            KS[t, a] = v
            curv[a] += S[t, c] * v
    return curv


@njit(cache=True)
def _cg_update(D, R, S, KS, cols, alpha):
    n, k = KS.shape
    rr = np.zeros(k)
    for t in range(n):
        for a in range(k):
            c = cols[a]
            D[t, c] += alpha[a] * S[t, c]
            r = R[t, c] - alpha[a] * KS[t, a]
            R[t, c] = r
            rr[a] += r * r
    return rr


@njit(cache=True)
def _direction_update(S, R, cols, beta):
    n = S.shape[0]
    for t in range(n):
        for a in range(cols.shape[0]):
            c = cols[a]
            S[t, c] = R[t, c] + beta[a] * S[t, c]


def _initial_block(dim: int, p: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((dim, p))


def solve(
    op,
    cfg: SolverConfig | None = None,
    X0: np.ndarray | None = None,
    diagnostics: TextIO | Callable[[str], None] | None = None,
) -> EigenResult:
    """Lowest ``cfg.n_wanted`` eigenpairs of the symmetric operator ``op``.

    ``X0`` warm-starts the block; missing columns are filled with seeded
    random vectors. ``diagnostics`` receives ``outer_iter,trace,max_residual``
    lines.
    """
    cfg = cfg or SolverConfig()
    A = _as_operator(op)
    n, p, nw = A.dim, cfg.block_size, cfg.n_wanted
    if p > n:
        raise ValueError(f"block size {p} exceeds operator dimension {n}")
    rng = np.random.default_rng(cfg.seed)

    if cfg.shift == "auto":
        if A.lower_bound is None:
            raise ValueError("operator has no Gershgorin bound; pass an explicit shift")
        sigma = abs(A.lower_bound) + 1.0
    else:
        sigma = float(cfg.shift)
    safe_mu = -sigma

    X = _initial_block(n, p, rng)
    if X0 is not None:
        X0 = np.asarray(X0, dtype=float).reshape(n, -1)
        k = min(p, X0.shape[1])
        X[:, :k] = X0[:, :k]

    emit = None
    if diagnostics is not None:
        emit = diagnostics if callable(diagnostics) else (lambda s: diagnostics.write(s + "\n"))

    history: list[float] = []
    dynamic_ok = cfg.dynamic_shift_trigger is not None
    prev = None  # (ritz section, residual norms) of the last accepted iterate
    used_dynamic = False
    converged = False
    it = 0
    rs = None
    rnorm = None
    while True:
        rs = ritz_section(A, X, rng)
        trace = float(rs.theta.sum())
        scale = 1.0 + float(np.abs(rs.theta).sum())
        if history and trace > history[-1] + 1e-13 * scale and used_dynamic:
            # shifted step raised the trace: redo it from the last iterate with the safe shift
            log.debug("trace increased by %.3e, retrying with safe shift", trace - history[-1])
            dynamic_ok = False
            rs, rnorm = prev
            X = _correct(A, rs, rnorm, np.full(p, safe_mu), cfg, nw)
            used_dynamic = False
            continue
        history.append(trace)
        R = rs.AX - rs.X * rs.theta
        rnorm = np.linalg.norm(R, axis=0)
        rel = rnorm / np.maximum(1.0, np.abs(rs.theta))
        if emit is not None:
            emit(f"{it},{trace!r},{float(rel[:nw].max())!r}")
        if np.all(rel[:nw] <= cfg.outer_tol):
            converged = True
            break
        if it >= cfg.max_outer:
            break
        it += 1

        mu = np.full(p, safe_mu)
        used_dynamic = False
        if dynamic_ok:
            close = rel <= cfg.dynamic_shift_trigger
            mu[close] = np.maximum(safe_mu, rs.theta[close] - rnorm[close])
            used_dynamic = bool(np.any(close))
        prev = (rs, rnorm)
        X, breakdown = _correct(A, rs, rnorm, mu, cfg, nw, return_breakdown=True)
        if np.any(breakdown & (mu > safe_mu)):
            log.debug("non-positive curvature under dynamic shift, falling back to safe shift")
            dynamic_ok = False
            X = _correct(A, rs, rnorm, np.full(p, safe_mu), cfg, nw)
            used_dynamic = False

    if not converged:
        log.warning("tracemin did not converge in %d outer iterations (residual %.3e)",
                    cfg.max_outer, float(rel[:nw].max()))
    return EigenResult(
        eigenvalues=rs.theta[:nw].copy(),
        eigenvectors=rs.X[:, :nw].copy(),
        residual_norms=rel[:nw].copy(),
        outer_iterations=it,
        converged=converged,
        block=rs.X,
        ritz_values=rs.theta.copy(),
        trace_history=history,
        matvecs=A.matvecs,
        shift=sigma,
    )


def _correct(A, rs: RitzSection, rnorm, mu, cfg: SolverConfig, nw: int, return_breakdown=False):
    rel = rnorm / np.maximum(1.0, np.abs(rs.theta))
    # wanted columns that are already converged need no correction
    active = np.ones(rs.X.shape[1], dtype=bool)
    active[:nw] = rel[:nw] > cfg.outer_tol
    corr = correction_step(
        A, rs.X, rs.AX, rs.theta, mu,
        inner_rel_tol=cfg.inner_rel_tol, max_inner=cfg.max_inner, active=active,
    )
    X = rs.X - corr.D
    return (X, corr.breakdown) if return_breakdown else X
