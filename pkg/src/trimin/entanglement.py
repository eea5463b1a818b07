"""Wootters concurrence and entanglement of formation for two qubits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rdm import ReducedDensityMatrix

TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
RANGE_TOL = 1e-12

_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


class InvalidDensityMatrix(ValueError):
    pass


@dataclass(frozen=True)
class ConcurrenceResult:
    C: float
    epsilons: tuple[float, float, float, float]
    E_of_F: float


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def entanglement_of_formation(C: float) -> float:
    if C < -RANGE_TOL or C > 1.0 + RANGE_TOL:
        raise ValueError(f"concurrence must lie in [0, 1], got {C!r}")
    C = min(max(C, 0.0), 1.0)
    return binary_entropy((1.0 - math.sqrt(1.0 - C * C)) / 2.0)


def _from_epsilons(eps) -> ConcurrenceResult:
    eps = tuple(sorted((float(e) for e in eps), reverse=True))
    C = max(0.0, eps[0] - eps[1] - eps[2] - eps[3])
    C = min(C, 1.0)
    return ConcurrenceResult(C=C, epsilons=eps, E_of_F=entanglement_of_formation(C))


def concurrence_general(rho: np.ndarray) -> ConcurrenceResult:
    """Concurrence of an arbitrary two-qubit density matrix.

    The epsilons are the square roots of the eigenvalues of
    ``rho @ rho_tilde`` with ``rho_tilde = (Y x Y) rho* (Y x Y)``. They are
    computed as the singular values of ``tau = W^T (Y x Y) W``, where
    ``rho = W W^dagger`` with ``W = V sqrt(w)``: ``tau^dagger tau`` has the
    spectrum of ``rho @ rho_tilde``, and no square root of a near-zero
    eigenvalue is ever taken, so pure states keep full precision.
    """
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise InvalidDensityMatrix(f"expected a 4x4 matrix, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise InvalidDensityMatrix("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidDensityMatrix(f"trace is {tr!r}, not 1")
    w, v = np.linalg.eigh(rho)
    if w.min() < -POSITIVITY_TOL:
        raise InvalidDensityMatrix(f"density matrix is not positive (min eigenvalue {w.min():.3e})")
    W = v * np.sqrt(np.clip(w, 0.0, None))
    tau = W.T @ _YY @ W
    return _from_epsilons(np.linalg.svd(tau, compute_uv=False))


def concurrence_x_state(rho: ReducedDensityMatrix) -> ConcurrenceResult:
    """Closed-form concurrence of an X-shaped density matrix.

    C = 2 max(0, |rho14| - sqrt(rho22 rho33), |rho23| - sqrt(rho11 rho44))
    """
    r11, r22, r33, r44 = rho.rho11, rho.rho22, rho.rho33, rho.rho44
    if abs(rho.trace - 1.0) > TRACE_TOL:
        raise InvalidDensityMatrix(f"trace is {rho.trace!r}, not 1")
    if min(r11, r22, r33, r44) < -POSITIVITY_TOL:
        raise InvalidDensityMatrix("negative population")
    a = math.sqrt(max(r11, 0.0) * max(r44, 0.0))
    b = math.sqrt(max(r22, 0.0) * max(r33, 0.0))
    c14, c23 = abs(rho.rho14), abs(rho.rho23)
    if c14 - a > POSITIVITY_TOL or c23 - b > POSITIVITY_TOL:
        raise InvalidDensityMatrix("density matrix is not positive (coherence exceeds populations)")
    eps = (a + c14, max(a - c14, 0.0), b + c23, max(b - c23, 0.0))
    return _from_epsilons(eps)
