import itertools

import pytest

from trimin.lattice import (
    build_cluster, build_patch, center_pair, lattice_summary, nearest_pairs, patch_sites,
)


@pytest.mark.parametrize("R,n,n_bonds,center", [(0, 1, 0, 1), (1, 7, 12, 4), (2, 19, 42, 10), (3, 37, 90, 19)])
def test_patch_sizes(R, n, n_bonds, center):
    lat = build_patch(R)
    assert lat.n_sites == n == 1 + 3 * R * (R + 1)
    assert len(lat.bonds) == n_bonds
    assert lat.center == center
    if R >= 1:
        assert len(lat.bonds) == 3 * (3 * R * R + R)


def test_row_lengths():
    rows = [s.r for s in build_patch(2).sites]
    assert [rows.count(r) for r in range(-2, 3)] == [3, 4, 5, 4, 3]
    rows = [s.r for s in build_patch(1).sites]
    assert [rows.count(r) for r in range(-1, 2)] == [2, 3, 2]


def test_bonds_are_ordered_and_unique():
    lat = build_patch(2)
    keys = [(b.i, b.j) for b in lat.bonds]
    assert all(i < j for i, j in keys)
    assert len(set(keys)) == len(keys)
    assert keys == sorted(keys)


@pytest.mark.parametrize("R", [1, 2, 3])
def test_degrees(R):
    lat = build_patch(R)
    for k, s in enumerate(lat.sites, start=1):
        d = lat.degree(k)
        assert 2 <= d <= 6
        interior = max(abs(s.q), abs(s.r), abs(s.q + s.r)) < R
        if interior:
            assert d == 6
    assert lat.degree(lat.center) == 6


def test_named_pairs_exist():
    assert {(1, 2), (1, 4)} <= set(nearest_pairs(build_patch(1)))
    assert {(1, 2), (2, 5), (5, 6), (5, 10)} <= set(nearest_pairs(build_patch(2)))
    assert nearest_pairs(build_patch(0)) == []
    assert center_pair(build_patch(1)) == (1, 4)
    assert center_pair(build_patch(2)) == (5, 10)


def test_center_pair_needs_bonds():
    with pytest.raises(ValueError):
        center_pair(build_patch(0))


def test_impurity_couplings():
    lat = build_patch(1, J=1.0, impurity=(4, 0.5))
    spokes = [b for b in lat.bonds if 4 in (b.i, b.j)]
    ring = [b for b in lat.bonds if 4 not in (b.i, b.j)]
    assert len(spokes) == 6 and len(ring) == 6
    assert all(b.coupling == 1.5 for b in spokes)
    assert all(b.coupling == 1.0 for b in ring)


@pytest.mark.parametrize("site", [1, 5, 10, 19])
def test_impurity_locality(site):
    clean = build_patch(2)
    dirty = build_patch(2, impurity=(site, 0.7))
    changed = [a for a, b in zip(clean.bonds, dirty.bonds) if a.coupling != b.coupling]
    assert len(changed) == clean.degree(site)
    assert all(site in (b.i, b.j) for b in changed)
    assert [(b.i, b.j) for b in clean.bonds] == [(b.i, b.j) for b in dirty.bonds]


def test_impurity_errors():
    with pytest.raises(ValueError, match="site out of range"):
        build_patch(1, impurity=(8, 0.5))
    with pytest.raises(ValueError, match="site out of range"):
        build_patch(1, impurity=(0, 0.5))
    with pytest.raises(ValueError):
        build_patch(1, impurity=(2, -1.5))
    with pytest.raises(ValueError):
        build_patch(-1)
    with pytest.raises(ValueError):
        build_patch(1, J=0.0)


def test_ring_is_vertex_transitive():
    # brute force: for any two ring sites some automorphism maps one onto the other
    lat = build_patch(1)
    edges = {frozenset((b.i, b.j)) for b in lat.bonds}
    ring = [k for k in range(1, 8) if k != lat.center]
    images = set()
    for perm in itertools.permutations(range(1, 8)):
        m = dict(zip(range(1, 8), perm))
        if {frozenset((m[a], m[b])) for a, b in map(tuple, edges)} == edges:
            images.add(m[ring[0]])
    assert set(ring) <= images


def test_with_impurity_matches_build_patch():
    a = build_patch(2).with_impurity(5, 0.25)
    b = build_patch(2, impurity=(5, 0.25))
    assert a == b


def test_cluster_renumbering():
    lat = build_cluster([(1, 0), (0, 0), (0, 1)])
    assert lat.n_sites == 3
    assert len(lat.bonds) == 3
    assert lat.sites[0] == (0, 0)


def test_patch_sites_order():
    s = patch_sites(1)
    assert s == sorted(s, key=lambda c: (c.r, c.q))


def test_summary_format():
    text = lattice_summary(build_patch(1, impurity=(4, 0.5)))
    bond_lines = [ln for ln in text.splitlines() if ln.count(",") == 2 and not ln.startswith("#")]
    # 7 site lines plus 12 bond lines share the three-field shape
    assert len(bond_lines) == 19
    assert "1,4,1.5" in text
