"""Kogut-Susskind Hamiltonian for U(1) gauge fields on a 2D lattice.

``H = H_E + H_B + H_m + H_kin`` with

* ``H_E = g^2/2 sum_links E^2``
* ``H_B = -1/(2 g^2) sum_plaq (P + P^dag)``
* ``H_m = m sum_n (-1)^(n_x+n_y) phi^dag_n phi_n``
* ``H_kin = sum_links s_link / 2 (phi^dag_n U_{n,mu} phi_{n+mu} + h.c.)``

``U`` lowers the flux on its link, so a hop that moves a fermion from
``n+mu`` onto ``n`` takes one unit of flux off the link between them. The
conserved Gauss generator is therefore

    G_n = sum_in E - sum_out E - rho_n,   rho_n = n_n - (1 - (-1)^(n_x+n_y)) / 2

which vanishes on the Dirac sea (odd sites filled, zero flux).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .encoding import (
    LinkTruncation,
    QubitLayout,
    build_layout,
    jw_op,
    link_E,
    link_E2,
    link_U,
    number_op,
    on_link,
)
from .lattice import Geometry, LatticeSpec, build_geometry, kinetic_sign, staggered_sign
from .pauli import PauliSum, product, total_of


@dataclass(frozen=True)
class QEDParams:
    spec: LatticeSpec
    truncation: LinkTruncation
    g: float = 1.0
    m: float = 0.0
    a: float = 1.0

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"coupling g must be positive (got {self.g})")
        if self.a != 1.0:
            raise ValueError("lattice spacing is fixed to a = 1")

    @property
    def geometry(self) -> Geometry:
        return build_geometry(self.spec)

    def layout(self) -> QubitLayout:
        return build_layout(self.geometry, self.truncation)


def _ctx(p: QEDParams, layout: QubitLayout | None) -> tuple[Geometry, QubitLayout]:
    g = p.geometry
    return g, (layout if layout is not None else build_layout(g, p.truncation))


def h_electric(p: QEDParams, layout: QubitLayout | None = None) -> PauliSum:
    geo, lay = _ctx(p, layout)
    e2 = link_E2(p.truncation)
    return total_of((on_link(e2, lay, i) for i in range(geo.n_links)), lay.total_qubits) * (0.5 * p.g**2)


def plaquette_operator(p: QEDParams, layout: QubitLayout | None, index: int) -> PauliSum:
    """``P = U_0 U_1 U_2^dag U_3^dag`` around plaquette ``index``."""
    geo, lay = _ctx(p, layout)
    u = link_U(p.truncation)
    ud = u.dagger()
    plaq = geo.plaquettes[index]
    factors = [on_link(u if s > 0 else ud, lay, li) for li, s in zip(plaq.links, plaq.signs)]
    return product(factors)


def h_magnetic(p: QEDParams, layout: QubitLayout | None = None) -> PauliSum:
    geo, lay = _ctx(p, layout)
    parts = []
    for i in range(geo.n_plaquettes):
        P = plaquette_operator(p, lay, i)
        parts.append(P + P.dagger())
    return total_of(parts, lay.total_qubits) * (-0.5 / p.g**2)


def h_mass(p: QEDParams, layout: QubitLayout | None = None) -> PauliSum:
    geo, lay = _ctx(p, layout)
    parts = [number_op(i, lay) * (p.m * staggered_sign(site)) for i, site in enumerate(geo.sites)]
    return total_of(parts, lay.total_qubits)


def hopping_term(p: QEDParams, layout: QubitLayout | None, link_index: int) -> PauliSum:
    """``phi^dag_n U_{n,mu} phi_{n+mu}`` for one link (without sign or h.c.)."""
    geo, lay = _ctx(p, layout)
    link = geo.links[link_index]
    u = on_link(link_U(p.truncation), lay, link_index)
    return jw_op(link.site, "create", lay) @ u @ jw_op(link.target, "annihilate", lay)


def h_kinetic(p: QEDParams, layout: QubitLayout | None = None) -> PauliSum:
    geo, lay = _ctx(p, layout)
    parts = []
    for link in geo.links:
        hop = hopping_term(p, lay, link.index)
        s = kinetic_sign(geo.sites[link.site], link.direction)
        parts.append((hop + hop.dagger()) * (0.5 * s))
    return total_of(parts, lay.total_qubits)


TERMS = {
    "electric": h_electric,
    "magnetic": h_magnetic,
    "mass": h_mass,
    "kinetic": h_kinetic,
}


def h_total(p: QEDParams, layout: QubitLayout | None = None) -> PauliSum:
    _, lay = _ctx(p, layout)
    return total_of((f(p, lay) for f in TERMS.values()), lay.total_qubits)


def background_charge(site: tuple[int, int]) -> int:
    """Staggered offset: 1 on odd sites (filled sea), 0 on even sites."""
    return 0 if staggered_sign(site) > 0 else 1


def charge_operator(p: QEDParams, layout: QubitLayout | None, site: int) -> PauliSum:
    geo, lay = _ctx(p, layout)
    rho = number_op(site, lay)
    return rho - PauliSum.identity(lay.total_qubits, background_charge(geo.sites[site]))


def gauss_operator(site: int, p: QEDParams, layout: QubitLayout | None = None) -> PauliSum:
    geo, lay = _ctx(p, layout)
    e = link_E(p.truncation)
    parts = [on_link(e, lay, l.index) for l in geo.incoming(site)]
    parts += [on_link(e, lay, l.index) * -1.0 for l in geo.outgoing(site)]
    parts.append(charge_operator(p, lay, site) * -1.0)
    return total_of(parts, lay.total_qubits)


# -- computational-basis bookkeeping ---------------------------------------


def basis_index(p: QEDParams, layout: QubitLayout, occupations, levels) -> int:
    """Basis index for fermion occupations (per site) and link levels (0..d_S-1)."""
    t = p.truncation
    idx = 0
    for site, occ in enumerate(occupations):
        if occ:
            idx |= 1 << layout.site_qubit[site]
    for li, k in enumerate(levels):
        idx |= t.level_state(k) << layout.link_qubits[li][0]
    return idx


def dirac_vacuum_index(p: QEDParams, layout: QubitLayout | None = None) -> int:
    """Odd sites filled, every link at zero flux."""
    geo, lay = _ctx(p, layout)
    t = p.truncation
    if t.perfect:
        raise ValueError("the perfect ladder has no zero-flux level")
    occ = [background_charge(s) for s in geo.sites]
    return basis_index(p, lay, occ, [t.l] * geo.n_links)


def gauss_sector_basis(p: QEDParams, layout: QubitLayout | None = None, charges=None) -> np.ndarray:
    """Sorted basis indices of physical states with ``G_n = charges[n]`` (default 0)."""
    geo, lay = _ctx(p, layout)
    t = p.truncation
    target = np.zeros(geo.n_sites) if charges is None else np.asarray(charges, dtype=float)
    levels = t.levels
    bg = np.array([background_charge(s) for s in geo.sites])
    inc = np.zeros((geo.n_sites, geo.n_links))
    for l in geo.links:
        inc[l.target, l.index] += 1.0
        inc[l.site, l.index] -= 1.0
    out = []
    link_configs = np.array(list(itertools.product(range(t.d_S), repeat=geo.n_links)), dtype=int)
    div = levels[link_configs] @ inc.T  # (configs, sites)
    for occ in itertools.product((0, 1), repeat=geo.n_sites):
        rho = np.asarray(occ) - bg
        ok = np.all(np.abs(div - rho - target) < 1e-9, axis=1)
        for cfg in link_configs[ok]:
            out.append(basis_index(p, lay, occ, cfg))
    return np.array(sorted(out), dtype=np.int64)


def restrict(h: PauliSum, basis: np.ndarray) -> sp.csr_matrix:
    """Matrix of ``h`` on the span of the given basis states."""
    full = h.to_sparse()
    return full[basis][:, basis].tocsr()
