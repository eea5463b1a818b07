"""Hexagonal patches of the triangular lattice.

Sites are kept in axial coordinates (q, r). A patch of shell radius R holds
every site with ``|q|, |r|, |q + r| <= R``, i.e. ``1 + 3R(R+1)`` sites.
Numbering is row-major: rows ordered by r, sites within a row by q, and
site numbers start at 1. With this numbering the 7-site centre is site 4 and
the 19-site centre is site 10.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

# the six axial unit displacements of the triangular lattice
NEIGHBOR_OFFSETS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


class SiteCoord(NamedTuple):
    q: int
    r: int


class Bond(NamedTuple):
    i: int
    j: int
    coupling: float


@dataclass(frozen=True)
class Lattice:
    """Finite triangular patch with per-bond couplings.

    ``sites[k]`` is site number ``k + 1``. Bonds use 1-based site numbers
    with ``i < j``.
    """

    shell_radius: int
    sites: tuple[SiteCoord, ...]
    bonds: tuple[Bond, ...]
    center: int
    J: float = 1.0
    impurity_site: int | None = None
    alpha: float = 0.0

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def degree(self, site: int) -> int:
        return sum(1 for b in self.bonds if site in (b.i, b.j))

    def neighbors(self, site: int) -> list[int]:
        out = []
        for b in self.bonds:
            if b.i == site:
                out.append(b.j)
            elif b.j == site:
                out.append(b.i)
        return sorted(out)

    def site_number(self, coord: tuple[int, int]) -> int:
        return self.sites.index(SiteCoord(*coord)) + 1

    def with_impurity(self, site: int | None, alpha: float = 0.0) -> "Lattice":
        impurity = None if site is None else (site, alpha)
        return build_cluster(self.sites, self.J, impurity, self.shell_radius)


def patch_sites(shell_radius: int) -> list[SiteCoord]:
    R = shell_radius
    return [
        SiteCoord(q, r)
        for r in range(-R, R + 1)
        for q in range(-R, R + 1)
        if abs(q + r) <= R
    ]


def build_patch(
    shell_radius: int,
    J: float = 1.0,
    impurity: tuple[int, float] | None = None,
) -> Lattice:
    """Build the hexagonal patch of the given shell radius.

    ``impurity`` is ``(site, alpha)``; every bond touching ``site`` gets
    coupling ``(1 + alpha) * J``.
    """
    if shell_radius < 0 or int(shell_radius) != shell_radius:
        raise ValueError(f"shell radius must be a non-negative integer, got {shell_radius!r}")
    return build_cluster(patch_sites(int(shell_radius)), J, impurity, shell_radius=int(shell_radius))


def build_cluster(
    coords,
    J: float = 1.0,
    impurity: tuple[int, float] | None = None,
    shell_radius: int = -1,
) -> Lattice:
    """Nearest-neighbour cluster on an arbitrary set of axial coordinates.

    Sites are renumbered row-major exactly as for the hexagonal patches.
    ``shell_radius`` is informational (-1 for clusters that are not patches).
    """
    if not J > 0:
        raise ValueError(f"J must be positive, got {J!r}")
    sites = sorted({SiteCoord(*c) for c in coords}, key=lambda s: (s.r, s.q))
    if not sites:
        raise ValueError("cluster has no sites")
    index = {s: k + 1 for k, s in enumerate(sites)}

    imp_site, alpha = None, 0.0
    if impurity is not None:
        imp_site, alpha = int(impurity[0]), float(impurity[1])
        if not 1 <= imp_site <= len(sites):
            raise ValueError(f"site out of range: {imp_site} (lattice has {len(sites)} sites)")
        if alpha < -1:
            raise ValueError(f"impurity strength alpha must be >= -1, got {alpha}")

    pairs = set()
    for s, k in index.items():
        for dq, dr in NEIGHBOR_OFFSETS:
            m = index.get(SiteCoord(s.q + dq, s.r + dr))
            if m is not None:
                pairs.add((min(k, m), max(k, m)))

    bonds = []
    for i, j in sorted(pairs):
        c = J * (1.0 + alpha) if imp_site in (i, j) else J
        bonds.append(Bond(i, j, c))

    # centre: the origin if present, else the site closest to the centroid
    origin = SiteCoord(0, 0)
    if origin in index:
        center = index[origin]
    else:
        cq = sum(s.q for s in sites) / len(sites)
        cr = sum(s.r for s in sites) / len(sites)
        center = 1 + min(range(len(sites)), key=lambda k: (sites[k].q - cq) ** 2 + (sites[k].r - cr) ** 2)

    return Lattice(
        shell_radius=shell_radius,
        sites=tuple(sites),
        bonds=tuple(bonds),
        center=center,
        J=float(J),
        impurity_site=imp_site,
        alpha=alpha,
    )


def nearest_pairs(lat: Lattice) -> list[tuple[int, int]]:
    return [(b.i, b.j) for b in lat.bonds]


def center_pair(lat: Lattice) -> tuple[int, int]:
    """Centre site and its lowest-numbered neighbour, as an ordered pair."""
    if not lat.bonds:
        raise ValueError("lattice has no bonds")
    nb = lat.neighbors(lat.center)[0]
    return (min(nb, lat.center), max(nb, lat.center))


def lattice_summary(lat: Lattice) -> str:
    """Text dump: a header, one ``site,q,r`` line per site, one ``i,j,coupling`` per bond."""
    lines = [
        f"# n_sites={lat.n_sites} bonds={len(lat.bonds)} center={lat.center} "
        f"impurity={lat.impurity_site} alpha={lat.alpha!r}",
        "# sites: site,q,r",
    ]
    lines += [f"{k + 1},{s.q},{s.r}" for k, s in enumerate(lat.sites)]
    lines.append("# bonds: i,j,coupling")
    lines += [f"{b.i},{b.j},{b.coupling!r}" for b in lat.bonds]
    return "\n".join(lines) + "\n"
