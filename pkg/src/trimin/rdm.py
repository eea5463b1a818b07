"""Two-site reduced density matrices read straight off a real state vector.

Basis states are indexed so that site 1 is the most significant bit. Looking
down the column of basis states, site ``i`` alternates between runs of 0s and
runs of 1s:

* segment length ``L.S.(i) = 2**(N-i)`` (one run of equal bits),
* period length ``L.P.(i) = 2 * L.S.(i)`` (a run of 0s followed by 1s).

For ``i < j`` the period of ``j`` nests inside a segment of ``i``, so every
basis state with ``(s_i, s_j) = (0, 0)`` sits in a contiguous run of length
``L.S.(j)`` that starts at ``p + m * L.P.(j)``, where ``p`` walks the periods
of ``i``. The partner states with bits ``(0,1)``, ``(1,0)``, ``(1,1)`` are the
same run shifted by ``L.S.(j)``, ``L.S.(i)`` and ``L.S.(i) + L.S.(j)``.

Parity symmetry of the Hamiltonian means only the diagonal and the two
anti-diagonal coherences survive, so six numbers describe the whole 4x4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

NORM_TOL = 1e-10


@dataclass(frozen=True)
class SegmentGeometry:
    period_length: int
    segment_length: int
    period_count: int
    segment_count: int


def segment_geometry(i: int, n_sites: int) -> SegmentGeometry:
    if not 1 <= i <= n_sites:
        raise ValueError(f"site {i} out of range for {n_sites} sites")
    return SegmentGeometry(
        period_length=2 ** (n_sites - i + 1),
        segment_length=2 ** (n_sites - i),
        period_count=2 ** (i - 1),
        segment_count=2**i,
    )


@dataclass(frozen=True)
class ReducedDensityMatrix:
    rho11: float
    rho22: float
    rho33: float
    rho44: float
    rho14: float
    rho23: float
    pair: tuple[int, int]

    @property
    def trace(self) -> float:
        return self.rho11 + self.rho22 + self.rho33 + self.rho44

    def to_matrix(self) -> np.ndarray:
        m = np.diag([self.rho11, self.rho22, self.rho33, self.rho44])
        m[0, 3] = m[3, 0] = self.rho14
        m[1, 2] = m[2, 1] = self.rho23
        return m

    def swapped(self) -> "ReducedDensityMatrix":
        """Same state with the two qubits relabelled (j, i)."""
        return ReducedDensityMatrix(
            self.rho11, self.rho33, self.rho22, self.rho44,
            self.rho14, self.rho23, (self.pair[1], self.pair[0]),
        )


@njit(cache=True)
def _x_entries(psi, ls_i, lp_i, ls_j, lp_j):
    dim = psi.shape[0]
    r11 = r22 = r33 = r44 = r14 = r23 = 0.0
    # first 0 of site i in every period
    for p in range(0, dim, lp_i):
        # first 0 of site j inside that segment of i
        for q in range(p, p + ls_i, lp_j):
            for t in range(q, q + ls_j):
                a00 = psi[t]
                a01 = psi[t + ls_j]
                a10 = psi[t + ls_i]
                a11 = psi[t + ls_i + ls_j]
                r11 += a00 * a00
                r22 += a01 * a01
                r33 += a10 * a10
                r44 += a11 * a11
                r14 += a00 * a11
                r23 += a01 * a10
    return r11, r22, r33, r44, r14, r23


def reduced_density_matrix(psi: np.ndarray, i: int, j: int) -> ReducedDensityMatrix:
    """X-shaped reduced density matrix of sites ``i`` and ``j`` (1-based).

    ``psi`` must be real and normalized. For ``i > j`` the pair is extracted
    as ``(j, i)`` and relabelled back, which swaps ``rho22`` and ``rho33``.
    """
    psi = np.asarray(psi)
    if i == j:
        raise ValueError("sites must differ")
    if np.iscomplexobj(psi):
        if np.abs(psi.imag).max(initial=0.0) > 0:
            raise ValueError("state must be real")
        psi = psi.real
    dim = psi.shape[0]
    n_sites = dim.bit_length() - 1
    if psi.ndim != 1 or dim != 1 << n_sites:
        raise ValueError(f"state length {dim} is not a power of two")
    if not (1 <= min(i, j) and max(i, j) <= n_sites):
        raise ValueError(f"pair ({i}, {j}) out of range for {n_sites} sites")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm = {norm!r})")
    if i > j:
        return reduced_density_matrix(psi, j, i).swapped()

    gi = segment_geometry(i, n_sites)
    gj = segment_geometry(j, n_sites)
    vals = _x_entries(
        np.ascontiguousarray(psi, dtype=np.float64),
        gi.segment_length, gi.period_length, gj.segment_length, gj.period_length,
    )
    return ReducedDensityMatrix(*map(float, vals), pair=(i, j))
