import numpy as np
import pytest
from hypothesis import given, strategies as st

from trimin.dense import dense_hamiltonian
from trimin.hamiltonian import (
    MAX_SITES, ResourceError, build_operator, column_string_structure, parity_signs,
    popcount, sigma_z_diagonal,
)
from trimin.lattice import Bond, Lattice, build_cluster, build_patch
from trimin.verify import random_cluster


def _chain(n, J=1.0):
    return build_cluster([(q, 0) for q in range(n)], J)


def test_diag_examples():
    assert np.array_equal(build_operator(build_patch(0), 1.0).diag, [-1.0, 1.0])
    assert np.array_equal(build_operator(_chain(2), 1.0).diag, [-2.0, 0.0, 0.0, 2.0])
    assert np.array_equal(build_operator(_chain(3), 2.0).diag, [-6, -2, -2, 2, -2, 2, 2, 6])


@given(st.integers(1, 12))
def test_diag_recursion_matches_popcount(n):
    k = np.arange(2**n)
    assert np.array_equal(sigma_z_diagonal(n), n - 2 * popcount(k))


def test_parity_signs():
    k = np.arange(2**6)
    assert np.array_equal(parity_signs(6), (-1.0) ** popcount(k))


def test_apply_examples():
    op = build_operator(build_patch(0), 1.0)
    assert np.array_equal(op.apply(np.array([1.0, 0.0])), [-1.0, 0.0])
    op = build_operator(_chain(2), 0.0)
    assert np.array_equal(op.apply(np.array([1.0, 0, 0, 0])), [0, 0, 0, -1.0])


def test_masks_have_two_bits():
    op = build_operator(build_patch(2), 1.0)
    assert all(bin(int(m)).count("1") == 2 for m in op.bond_masks)
    # site 1 is the most significant bit
    assert int(op.bond_masks[0]) == (1 << 18) | (1 << 17)


def test_seven_site_matches_dense(rng):
    lat = build_patch(1, impurity=(3, 0.3))
    op = build_operator(lat, 1.7)
    H = dense_hamiltonian(lat, 1.7)
    Y = rng.standard_normal((128, 5))
    assert np.abs(op.apply(Y) - H @ Y).max() <= 1e-13 * np.abs(H @ Y).max()
    assert np.abs(op @ Y[:, 0] - H @ Y[:, 0]).max() < 1e-12


@given(st.integers(0, 2**31 - 1))
def test_random_clusters_match_dense(seed):
    rng = np.random.default_rng(seed)
    lat = random_cluster(rng, int(rng.integers(2, 9)), float(rng.uniform(-0.5, 1.5)))
    h = float(rng.uniform(0, 6))
    op = build_operator(lat, h)
    H = dense_hamiltonian(lat, h)
    Y = rng.standard_normal((op.dim, 3))
    ref = H @ Y
    assert np.abs(op.apply(Y) - ref).max() <= 1e-13 * max(1.0, np.abs(ref).max())


def test_symmetry_19_sites(rng):
    op = build_operator(build_patch(2, impurity=(5, 0.4)), 2.3)
    x, y = rng.standard_normal((2, op.dim))
    a, b = x @ op.apply(y), op.apply(x) @ y
    assert abs(a - b) <= 1e-13 * abs(a) * 10


def test_single_bond_involution(rng):
    lat = Lattice(shell_radius=-1, sites=build_patch(1).sites, bonds=(Bond(2, 5, 1.3),), center=4)
    op = build_operator(lat, 0.0)
    Y = rng.standard_normal((128, 2))
    assert np.allclose(op.apply(op.apply(Y)), 1.3**2 * Y, atol=1e-13)
    mask = int(op.bond_masks[0])
    k = np.arange(128)
    assert np.array_equal((k ^ mask) ^ mask, k)


def test_apply_out_and_errors(rng):
    op = build_operator(build_patch(1), 1.0)
    Y = rng.standard_normal((128, 3))
    out = np.empty_like(Y)
    assert op.apply(Y, out) is out
    assert np.allclose(out, op.apply(Y))
    fout = np.empty((128, 3), order="F")
    op.apply(Y, fout)
    assert np.allclose(fout, out)
    with pytest.raises(ValueError, match="dimension"):
        op.apply(np.ones(64))
    with pytest.raises(ValueError, match="alias"):
        op.apply(Y, Y)


def test_build_operator_guards():
    with pytest.raises(ResourceError):
        build_operator(build_patch(3), 1.0)
    assert MAX_SITES == 26
    with pytest.raises(ValueError):
        build_operator(build_patch(1), -1.0)


def test_gershgorin_bounds_contain_spectrum():
    lat = build_patch(1, impurity=(1, 0.8))
    op = build_operator(lat, 2.0)
    lo, hi = op.gershgorin_bounds()
    ev = np.linalg.eigvalsh(dense_hamiltonian(lat, 2.0))
    assert lo <= ev[0] and ev[-1] <= hi


@pytest.mark.parametrize("i,j,N,expected", [
    (3, 2, 5, (13, 4, 4)),
    (1, 0, 2, (4, 1, 2)),  # two single-row runs at offsets 3 and 1
    (2, 0, 4, (6, 1, 8)),
])
def test_column_string_structure_examples(i, j, N, expected):
    assert column_string_structure(i, j, N) == expected


def test_column_string_structure_errors():
    with pytest.raises(ValueError):
        column_string_structure(2, 2, 5)
    with pytest.raises(ValueError):
        column_string_structure(1, 2, 5)
    with pytest.raises(ValueError):
        column_string_structure(5, 1, 5)


def _runs(offsets):
    runs, prev, length = [], 0, 0
    for o in offsets:
        if o > 0 and o == prev:
            length += 1
        else:
            if prev > 0:
                runs.append(length)
            length = 1 if o > 0 else 0
        prev = o
    if prev > 0:
        runs.append(length)
    return runs


@pytest.mark.parametrize("N", range(2, 11))
def test_xor_reproduces_run_structure(N):
    rows = np.arange(2**N)
    for i in range(N):
        for j in range(i):
            cols = rows ^ ((1 << i) | (1 << j))
            first, run_len, n_runs = column_string_structure(i, j, N)
            assert cols[0] + 1 == first
            runs = _runs(np.where(cols > rows, cols - rows, 0))
            assert len(runs) == n_runs
            assert set(runs) == {run_len}
