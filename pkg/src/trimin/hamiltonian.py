"""Matrix-free transverse-field Ising Hamiltonian.

    H = -sum_<ij> J_ij X_i X_j - h sum_i Z_i

on a :class:`~trimin.lattice.Lattice`. Site ``k`` (1-based) lives on bit
``N - k`` of the basis-state index, so site 1 is the most significant bit.

H is never stored. The Z-field part is a length-``2**N`` diagonal. Each
X_i X_j bond is a permutation matrix: row ``k`` has its single nonzero in
column ``k ^ mask``, where ``mask`` has the two bits of the bond set.
Applying H to a block ``Y`` (rows = basis states) is then one diagonal
scaling plus one gathered row-sum per bond.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .lattice import Lattice

MAX_SITES = 26


class ResourceError(MemoryError):
    """Requested system is too large for the in-memory representation."""


def site_bit(site: int, n_sites: int) -> int:
    return n_sites - site


def sigma_z_diagonal(n_sites: int) -> np.ndarray:
    """Diagonal of sum_i Z_i, built by repeated doubling.

    Start from ``v = (N)`` and replace ``v`` by ``(v, v - 2)`` N times.
    Entry k equals ``N - 2 * popcount(k)``.
    """
    v = np.array([float(n_sites)])
    for _ in range(n_sites):
        v = np.concatenate((v, v - 2.0))
    return v


def popcount(k: np.ndarray) -> np.ndarray:
    k = np.asarray(k, dtype=np.int64)
    out = np.zeros(k.shape, dtype=np.int64)
    while np.any(k):
        out += k & 1
        k = k >> 1
    return out


@njit(cache=True)
def _apply_block(diag, masks, couplings, Y, out, tile=4096):
    dim, m = Y.shape
    # one cache-sized tile of output rows receives every bond before moving on;
    # for a fixed mask, k ^ mask walks the source rows in contiguous runs
    for k0 in range(0, dim, tile):
        k1 = min(k0 + tile, dim)
        for k in range(k0, k1):
            d = diag[k]
            for c in range(m):
                out[k, c] = d * Y[k, c]
        for b in range(masks.shape[0]):
            mask = masks[b]
            w = couplings[b]
            for k in range(k0, k1):
                kk = k ^ mask
                for c in range(m):
                    out[k, c] -= w * Y[kk, c]
    return out


@dataclass(frozen=True, eq=False)
class HamiltonianOperator:
    n_sites: int
    diag: np.ndarray
    bond_masks: np.ndarray
    couplings: np.ndarray
    h: float
    J: float

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    def apply(self, Y: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """Return ``H @ Y`` for a vector or a ``(dim, m)`` block."""
        Y = np.asarray(Y)
        if Y.shape[0] != self.dim or Y.ndim not in (1, 2):
            raise ValueError(f"dimension mismatch: operator is {self.dim}, got array of shape {Y.shape}")
        Yb = np.ascontiguousarray(Y, dtype=np.float64)
        if Yb.ndim == 1:
            Yb = Yb.reshape(-1, 1)
        if out is None:
            ob = np.empty_like(Yb)
        else:
            if out.shape != Y.shape:
                raise ValueError(f"output shape {out.shape} does not match input {Y.shape}")
            if np.shares_memory(out, Y):
                raise ValueError("output must not alias the input")
            ob = out if out.flags.c_contiguous else np.empty_like(Yb)
            ob = ob.reshape(Yb.shape)
        _apply_block(self.diag, self.bond_masks, self.couplings, Yb, ob)
        if out is not None:
            if not out.flags.c_contiguous:
                out[...] = ob.reshape(out.shape)
            return out
        return ob.reshape(Y.shape)

    __matmul__ = apply

    def gershgorin_bounds(self) -> tuple[float, float]:
        # masks are distinct, so every row holds each coupling exactly once off the diagonal
        radius = float(np.abs(self.couplings).sum())
        return float(self.diag.min()) - radius, float(self.diag.max()) + radius


def build_operator(lat: Lattice, h: float) -> HamiltonianOperator:
    N = lat.n_sites
    if N < 1:
        raise ValueError("lattice has no sites")
    if N > MAX_SITES:
        raise ResourceError(f"{N} sites exceeds the {MAX_SITES}-site limit of the dense state vector")
    if h < 0:
        raise ValueError(f"field h must be non-negative, got {h}")
    diag = -float(h) * sigma_z_diagonal(N)
    masks = np.array(
        [(1 << site_bit(b.i, N)) | (1 << site_bit(b.j, N)) for b in lat.bonds],
        dtype=np.int64,
    )
    couplings = np.array([b.coupling for b in lat.bonds], dtype=np.float64)
    return HamiltonianOperator(
        n_sites=N,
        diag=diag,
        bond_masks=masks,
        couplings=couplings,
        h=float(h),
        J=lat.J,
    )


def column_string_structure(i: int, j: int, n_sites: int) -> tuple[int, int, int]:
    """Nonzero layout of ``I x .. X_i x .. X_j x .. I`` in 1-based row/column terms.

    ``i > j`` are bit positions (leftmost tensor factor is bit ``N - 1``).
    Returns the 1-based column of the nonzero in row 1, the length of each
    contiguous diagonal run, and the number of runs above the diagonal.
    """
    if i == j:
        raise ValueError("spin positions must differ")
    if not (0 <= j < i <= n_sites - 1):
        raise ValueError(f"need 0 <= j < i <= N-1, got i={i}, j={j}, N={n_sites}")
    return 1 + 2**i + 2**j, 2**j, 2 ** (n_sites - j - 1)


def parity_signs(n_sites: int) -> np.ndarray:
    """``(-1)**popcount(k)``: eigenvalues of the global spin flip prod_i Z_i."""
    s = np.ones(1)
    for _ in range(n_sites):
        s = np.concatenate((s, -s))
    return s
