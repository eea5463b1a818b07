"""Brute-force reference implementations for small systems.

Everything here is built the slow, literal way (Kronecker products, full
diagonalization, definitional partial trace) and exists to check the
matrix-free code paths. Capped at 14 sites.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .hamiltonian import ResourceError
from .lattice import Lattice

MAX_DENSE_SITES = 14

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
IDENTITY = np.eye(2)


def _check_size(n: int) -> None:
    if n > MAX_DENSE_SITES:
        raise ResourceError(f"dense oracle is limited to {MAX_DENSE_SITES} sites, got {n}")


def site_operator(ops: dict[int, np.ndarray], n_sites: int) -> np.ndarray:
    """Tensor product with ``ops[site]`` on the given 1-based sites, identity elsewhere.

    Site 1 is the leftmost factor.
    """
    return reduce(np.kron, [ops.get(k, IDENTITY) for k in range(1, n_sites + 1)])


def dense_hamiltonian(lat: Lattice, h: float) -> np.ndarray:
    N = lat.n_sites
    _check_size(N)
    H = np.zeros((2**N, 2**N))
    for b in lat.bonds:
        H -= b.coupling * site_operator({b.i: PAULI_X, b.j: PAULI_X}, N)
    for k in range(1, N + 1):
        H -= h * site_operator({k: PAULI_Z}, N)
    return H


def dense_eigensolve(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full spectrum of a real symmetric matrix, ascending."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if np.abs(M - M.conj().T).max(initial=0.0) > 1e-13 * scale:
        raise ValueError("matrix is not symmetric")
    return np.linalg.eigh(M)


def dense_partial_trace(psi: np.ndarray, i: int, j: int, n_sites: int) -> np.ndarray:
    """Reduced density matrix of sites ``i`` and ``j`` of the pure state ``psi``.

    Sums ``<a b e|psi><psi|a' b' e>`` over every environment configuration
    ``e`` of the other ``N - 2`` spins. Row/column order is
    ``|s_i s_j> = |00>, |01>, |10>, |11>``.
    """
    if i == j:
        raise ValueError("sites must differ")
    _check_size(n_sites)
    psi = np.asarray(psi)
    if psi.shape != (2**n_sites,):
        raise ValueError(f"state has shape {psi.shape}, expected ({2**n_sites},)")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("state is not normalized")
    bi, bj = n_sites - i, n_sites - j
    env_bits = [n_sites - k for k in range(1, n_sites + 1) if k not in (i, j)]

    rho = np.zeros((4, 4), dtype=psi.dtype)
    for e in range(2 ** (n_sites - 2)):
        base = 0
        for pos, bit in enumerate(env_bits):
            if (e >> pos) & 1:
                base |= 1 << bit
        amps = np.array(
            [psi[base | (a << bi) | (b << bj)] for a in (0, 1) for b in (0, 1)]
        )
        rho += np.outer(amps, amps.conj())
    return rho
