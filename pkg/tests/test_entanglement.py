import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from trimin.entanglement import (
    InvalidDensityMatrix, binary_entropy, concurrence_general, concurrence_x_state,
    entanglement_of_formation,
)
from trimin.rdm import ReducedDensityMatrix


def _bell(odd=False):
    v = np.zeros(4)
    if odd:
        v[1] = v[2] = 1 / math.sqrt(2)
    else:
        v[0] = v[3] = 1 / math.sqrt(2)
    return np.outer(v, v)


def test_general_examples():
    r = concurrence_general(_bell())
    assert r.C == pytest.approx(1.0, abs=1e-12) and r.E_of_F == pytest.approx(1.0, abs=1e-9)
    r = concurrence_general(np.eye(4) / 4)
    assert r.C == 0.0
    assert np.allclose(r.epsilons, 0.25)
    assert concurrence_general(np.diag([0.5, 0, 0, 0.5])).C == 0.0


def test_x_state_examples():
    assert concurrence_x_state(ReducedDensityMatrix(0.5, 0, 0, 0.5, 0.5, 0, (1, 2))).C == pytest.approx(1.0)
    assert concurrence_x_state(ReducedDensityMatrix(0, 0.5, 0.5, 0, 0, 0.5, (1, 2))).C == pytest.approx(1.0)
    assert concurrence_x_state(ReducedDensityMatrix(0.25, 0.25, 0.25, 0.25, 0, 0, (1, 2))).C == 0.0


def test_eof_values():
    assert entanglement_of_formation(0.0) == 0.0
    assert entanglement_of_formation(1.0) == 1.0
    x = (1 - math.sqrt(0.75)) / 2
    assert x == pytest.approx(0.0669873, abs=1e-7)
    assert entanglement_of_formation(0.5) == pytest.approx(binary_entropy(x), abs=1e-15)
    assert entanglement_of_formation(0.5) == pytest.approx(0.35458, abs=1e-5)


def test_eof_range_checks():
    assert entanglement_of_formation(1.0 + 5e-13) == 1.0
    assert entanglement_of_formation(-5e-13) == 0.0
    with pytest.raises(ValueError):
        entanglement_of_formation(1.01)
    with pytest.raises(ValueError):
        entanglement_of_formation(-1e-6)


def test_eof_monotone():
    cs = np.linspace(1e-4, 1, 500)
    es = [entanglement_of_formation(c) for c in cs]
    assert np.all(np.diff(es) > 0)


def _random_x_state(rng):
    p = rng.dirichlet(np.ones(4))
    c14 = rng.uniform(-1, 1) * math.sqrt(p[0] * p[3])
    c23 = rng.uniform(-1, 1) * math.sqrt(p[1] * p[2])
    return ReducedDensityMatrix(*p, c14, c23, (1, 2))


def test_x_state_matches_general_bulk(rng):
    worst = 0.0
    for _ in range(10_000):
        r = _random_x_state(rng)
        worst = max(worst, abs(concurrence_x_state(r).C - concurrence_general(r.to_matrix()).C))
    assert worst <= 1e-10


def test_pure_x_states_keep_precision(rng):
    for _ in range(200):
        a, b = rng.standard_normal(2)
        v = np.array([a, 0, 0, b]) / math.hypot(a, b)
        rho = np.outer(v, v)
        r = ReducedDensityMatrix(rho[0, 0], 0, 0, rho[3, 3], rho[0, 3], 0, (1, 2))
        assert abs(concurrence_general(rho).C - concurrence_x_state(r).C) <= 1e-12


def _random_unitary(rng):
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@given(st.integers(0, 2**31 - 1))
def test_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = A @ A.conj().T
    rho /= np.trace(rho).real
    U = np.kron(_random_unitary(rng), _random_unitary(rng))
    c0 = concurrence_general(rho).C
    c1 = concurrence_general(U @ rho @ U.conj().T).C
    assert abs(c0 - c1) <= 1e-10


@given(st.integers(0, 2**31 - 1))
def test_ranges(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((4, 2))
    rho = A @ A.T
    rho /= np.trace(rho)
    r = concurrence_general(rho)
    assert 0 <= r.C <= 1 and 0 <= r.E_of_F <= 1
    assert list(r.epsilons) == sorted(r.epsilons, reverse=True)
    assert min(r.epsilons) >= 0


def test_invalid_inputs():
    with pytest.raises(InvalidDensityMatrix, match="trace"):
        concurrence_general(np.eye(4) / 2)
    with pytest.raises(InvalidDensityMatrix, match="positive"):
        concurrence_general(np.diag([1.2, -0.2, 0, 0]))
    with pytest.raises(InvalidDensityMatrix, match="Hermitian"):
        m = np.eye(4) / 4
        m[0, 1] = 0.1
        concurrence_general(m)
    with pytest.raises(InvalidDensityMatrix):
        concurrence_general(np.eye(3) / 3)
    with pytest.raises(InvalidDensityMatrix):
        concurrence_x_state(ReducedDensityMatrix(0.5, 0, 0, 0.5, 0.7, 0, (1, 2)))
    with pytest.raises(InvalidDensityMatrix, match="trace"):
        concurrence_x_state(ReducedDensityMatrix(0.5, 0, 0, 0.6, 0, 0, (1, 2)))


def test_tiny_negative_eigenvalue_is_clipped():
    rho = _bell()
    rho[1, 1] = -1e-13
    rho[0, 0] += 1e-13
    assert concurrence_general(rho).C == pytest.approx(1.0, abs=1e-6)
