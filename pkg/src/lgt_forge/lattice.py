"""Two-dimensional square lattice: sites, links and plaquettes.

Index conventions (stable, relied on by the qubit layout):

* sites are row-major, ``index = y * Lx + x``;
* links are grouped x-direction first, then y-direction, each group row-major
  over its base site;
* plaquettes are row-major over their lower-left site and list their four
  links counter-clockwise, ``U(n,x) U(n+x,y) U†(n+y,x) U†(n,y)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum


class Boundary(str, Enum):
    OPEN = "open"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class LatticeSpec:
    Lx: int
    Ly: int
    boundary: Boundary = Boundary.OPEN
    a: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if self.Lx < 2 or self.Ly < 2:
            raise ValueError(f"lattice needs Lx, Ly >= 2 (got {self.Lx}x{self.Ly})")
        if self.a <= 0:
            raise ValueError("lattice spacing must be positive")


@dataclass(frozen=True)
class Link:
    index: int
    site: int
    direction: str  # "x" or "y"
    target: int


@dataclass(frozen=True)
class Plaquette:
    index: int
    site: int
    links: tuple[int, int, int, int]
    # +1 -> U, -1 -> U†
    signs: tuple[int, int, int, int] = (1, 1, -1, -1)


@dataclass(frozen=True)
class Geometry:
    spec: LatticeSpec
    sites: tuple[tuple[int, int], ...]
    links: tuple[Link, ...]
    plaquettes: tuple[Plaquette, ...]
    _link_lookup: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def n_links(self) -> int:
        return len(self.links)

    @property
    def n_plaquettes(self) -> int:
        return len(self.plaquettes)

    def site_index(self, nx: int, ny: int) -> int:
        if not (0 <= nx < self.spec.Lx and 0 <= ny < self.spec.Ly):
            raise ValueError(f"site ({nx}, {ny}) outside the lattice")
        return ny * self.spec.Lx + nx

    def link(self, site: int, direction: str) -> Link:
        return self.links[self._link_lookup[(site, direction)]]

    def has_link(self, site: int, direction: str) -> bool:
        return (site, direction) in self._link_lookup

    def outgoing(self, site: int) -> list[Link]:
        return [l for l in self.links if l.site == site]

    def incoming(self, site: int) -> list[Link]:
        return [l for l in self.links if l.target == site]

    def to_dict(self) -> dict:
        return {
            "Lx": self.spec.Lx,
            "Ly": self.spec.Ly,
            "boundary": self.spec.boundary.value,
            "sites": [{"index": i, "x": x, "y": y} for i, (x, y) in enumerate(self.sites)],
            "links": [
                {"index": l.index, "site": l.site, "direction": l.direction, "target": l.target}
                for l in self.links
            ],
            "plaquettes": [
                {"index": p.index, "site": p.site, "links": list(p.links), "signs": list(p.signs)}
                for p in self.plaquettes
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def build_geometry(spec: LatticeSpec) -> Geometry:
    Lx, Ly = spec.Lx, spec.Ly
    periodic = spec.boundary is Boundary.PERIODIC
    sites = tuple((x, y) for y in range(Ly) for x in range(Lx))

    def idx(x: int, y: int) -> int:
        return (y % Ly) * Lx + (x % Lx)

    links: list[Link] = []
    lookup: dict[tuple[int, str], int] = {}
    for y in range(Ly):
        for x in range(Lx if periodic else Lx - 1):
            lookup[(idx(x, y), "x")] = len(links)
            links.append(Link(len(links), idx(x, y), "x", idx(x + 1, y)))
    for y in range(Ly if periodic else Ly - 1):
        for x in range(Lx):
            lookup[(idx(x, y), "y")] = len(links)
            links.append(Link(len(links), idx(x, y), "y", idx(x, y + 1)))

    plaquettes: list[Plaquette] = []
    for y in range(Ly if periodic else Ly - 1):
        for x in range(Lx if periodic else Lx - 1):
            n = idx(x, y)
            cycle = (
                lookup[(n, "x")],
                lookup[(idx(x + 1, y), "y")],
                lookup[(idx(x, y + 1), "x")],
                lookup[(n, "y")],
            )
            plaquettes.append(Plaquette(len(plaquettes), n, cycle))
    return Geometry(spec, sites, tuple(links), tuple(plaquettes), lookup)


def staggered_parity(site: tuple[int, int], spec: LatticeSpec | None = None) -> str:
    """'even' if n_x + n_y is even, else 'odd'."""
    nx, ny = site
    if nx < 0 or ny < 0 or (spec is not None and (nx >= spec.Lx or ny >= spec.Ly)):
        raise ValueError(f"site {site} outside the lattice")
    return "even" if (nx + ny) % 2 == 0 else "odd"


def staggered_sign(site: tuple[int, int]) -> int:
    """(-1)^(n_x + n_y)."""
    return 1 if staggered_parity(site) == "even" else -1


def kinetic_sign(site: tuple[int, int], direction: str) -> int:
    """Sign of the hopping amplitude on a link: -1 on x-links, (-1)^n_x on y-links."""
    nx, _ = site
    if direction == "x":
        return -1
    if direction == "y":
        return -1 if nx % 2 else 1
    raise ValueError(f"unknown direction {direction!r}")
