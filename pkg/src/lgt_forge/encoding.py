"""Qubit encodings of fermionic sites and truncated U(1) links.

Fermions use Jordan-Wigner with modes ordered row-major over sites; a mode is
occupied when its qubit is |1>, so ``n = (I - Z) / 2``. Link registers hold
the truncated electric ladder ``e = -l..l`` either in binary (logarithmic) or
one-hot (linear). Binary padding levels carry ``E = 0`` and are never reached
by ``U``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .lattice import Geometry
from .pauli import PauliString, PauliSum, decompose


class Scheme(str, Enum):
    LINEAR = "linear"
    LOGARITHMIC = "logarithmic"


@dataclass(frozen=True)
class LinkTruncation:
    """Electric ladder truncated to ``d_S`` levels.

    ``d_S = 2l + 1`` (levels ``-l..l``); with ``perfect=True`` the ladder has
    ``d_S = 2l`` half-integer levels and no ``e = 0`` state, which fills a
    binary register exactly when ``2l`` is a power of two.
    """

    l: int
    scheme: Scheme = Scheme.LOGARITHMIC
    perfect: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.l < 1:
            raise ValueError(f"truncation l must be >= 1 (got {self.l})")
        if self.perfect:
            if self.scheme is not Scheme.LOGARITHMIC:
                raise ValueError("the perfect ladder is defined for the logarithmic scheme only")
            if self.d_S & (self.d_S - 1):
                raise ValueError(f"perfect ladder needs a power-of-two d_S (got {self.d_S})")

    @property
    def d_S(self) -> int:
        return 2 * self.l if self.perfect else 2 * self.l + 1

    @property
    def qubits_per_link(self) -> int:
        if self.scheme is Scheme.LINEAR:
            return self.d_S
        return max(1, math.ceil(math.log2(self.d_S)))

    @property
    def levels(self) -> np.ndarray:
        """Electric eigenvalue of each physical level, ascending."""
        return np.arange(self.d_S) - (self.d_S - 1) / 2

    def level_state(self, k: int) -> int:
        """Basis index (within the link register) of physical level ``k``."""
        if not 0 <= k < self.d_S:
            raise ValueError(f"level {k} outside 0..{self.d_S - 1}")
        return 1 << k if self.scheme is Scheme.LINEAR else k

    def physical_states(self) -> list[int]:
        return [self.level_state(k) for k in range(self.d_S)]


def _diag_on_register(t: LinkTruncation, values: np.ndarray) -> PauliSum:
    q = t.qubits_per_link
    if t.scheme is Scheme.LINEAR:
        # sum_k v_k n_k with n_k = (I - Z_k) / 2
        terms = [(0.5 * float(np.sum(values)), PauliString(q, 0, 0))]
        terms += [(-0.5 * float(v), PauliString.single(q, k, "Z")) for k, v in enumerate(values)]
        return PauliSum.from_terms(q, terms).simplify()
    diag = np.zeros(1 << q)
    diag[: t.d_S] = values
    return decompose(np.diag(diag))


@lru_cache(maxsize=None)
def link_E(t: LinkTruncation) -> PauliSum:
    """Electric field operator on one link register."""
    return _diag_on_register(t, t.levels)


@lru_cache(maxsize=None)
def link_E2(t: LinkTruncation) -> PauliSum:
    """E^2 on one link register (one-hot form ``sum e^2 n_k`` for the linear scheme)."""
    return _diag_on_register(t, t.levels**2)


@lru_cache(maxsize=None)
def link_projector(t: LinkTruncation, k: int) -> PauliSum:
    """Projector onto physical level ``k``."""
    values = np.zeros(t.d_S)
    values[k] = 1.0
    return _diag_on_register(t, values)


def _sigma(q: int, k: int, raising: bool) -> PauliSum:
    # |1><0| = (X - iY)/2 raises occupation; |0><1| = (X + iY)/2 lowers it
    s = -0.5j if raising else 0.5j
    return PauliSum.from_terms(q, [(0.5, PauliString.single(q, k, "X")), (s, PauliString.single(q, k, "Y"))])


@lru_cache(maxsize=None)
def link_U(t: LinkTruncation) -> PauliSum:
    """Lowering operator ``U|e> = |e - 1>``, ``U|-l> = 0``."""
    q = t.qubits_per_link
    if t.scheme is Scheme.LINEAR:
        out = PauliSum.zero(q)
        for k in range(1, t.d_S):
            out = out + (_sigma(q, k - 1, True) @ _sigma(q, k, False))
        return out.simplify()
    m = np.zeros((1 << q, 1 << q))
    for k in range(1, t.d_S):
        m[k - 1, k] = 1.0
    return decompose(m, hermitian_tol=None)


def link_dense(op: PauliSum, t: LinkTruncation) -> np.ndarray:
    """Matrix of a link operator restricted to the physical levels."""
    states = t.physical_states()
    full = op.to_dense()
    return full[np.ix_(states, states)]


@dataclass(frozen=True)
class QubitLayout:
    """Assignment of sites and links to a linear qubit register.

    Fermion qubits come first (qubit = site index); link ``i`` occupies
    ``link_qubits[i] = (start, stop)``.
    """

    total_qubits: int
    site_qubit: tuple[int, ...]
    link_qubits: tuple[tuple[int, int], ...]
    jw_order: tuple[int, ...]
    truncation: LinkTruncation

    @property
    def n_fermion_qubits(self) -> int:
        return len(self.site_qubit)

    def to_dict(self) -> dict:
        return {
            "total_qubits": self.total_qubits,
            "site_qubit": list(self.site_qubit),
            "link_qubits": [list(r) for r in self.link_qubits],
            "jw_order": list(self.jw_order),
            "scheme": self.truncation.scheme.value,
            "l": self.truncation.l,
            "d_S": self.truncation.d_S,
            "qubits_per_link": self.truncation.qubits_per_link,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def build_layout(g: Geometry, t: LinkTruncation) -> QubitLayout:
    q = t.qubits_per_link
    n_sites = g.n_sites
    link_qubits = tuple((n_sites + i * q, n_sites + (i + 1) * q) for i in range(g.n_links))
    return QubitLayout(
        total_qubits=n_sites + g.n_links * q,
        site_qubit=tuple(range(n_sites)),
        link_qubits=link_qubits,
        jw_order=tuple(range(n_sites)),
        truncation=t,
    )


def jw_op(mode_index: int, kind: str, layout: QubitLayout | int) -> PauliSum:
    """Jordan-Wigner ladder operator ``(prod_{k<j} Z_k)(X_j -/+ iY_j)/2``.

    ``kind`` is ``"create"`` or ``"annihilate"``; ``layout`` may be a plain
    qubit count, in which case mode ``j`` sits on qubit ``j``.
    """
    if isinstance(layout, int):
        n_total, order = layout, list(range(layout))
    else:
        n_total, order = layout.total_qubits, [layout.site_qubit[s] for s in layout.jw_order]
    if not 0 <= mode_index < len(order):
        raise IndexError(f"mode {mode_index} outside the fermionic register of {len(order)} modes")
    if kind not in ("create", "annihilate"):
        raise ValueError(f"kind must be 'create' or 'annihilate' (got {kind!r})")
    zmask = 0
    for k in order[:mode_index]:
        zmask |= 1 << k
    q = order[mode_index]
    sign = -0.5j if kind == "create" else 0.5j
    x_term = PauliString(n_total, 1 << q, zmask)
    # Y_q Z-string: label Y on q carries both bits
    y_term = PauliString(n_total, 1 << q, zmask | (1 << q))
    return PauliSum.from_terms(n_total, [(0.5, x_term), (sign, y_term)])


def number_op(mode_index: int, layout: QubitLayout | int) -> PauliSum:
    if isinstance(layout, int):
        n_total, q = layout, mode_index
    else:
        n_total, q = layout.total_qubits, layout.site_qubit[layout.jw_order[mode_index]]
    return PauliSum.from_terms(n_total, [(0.5, PauliString(n_total, 0, 0)), (-0.5, PauliString.single(n_total, q, "Z"))])


def on_link(op: PauliSum, layout: QubitLayout, link_index: int) -> PauliSum:
    start, _ = layout.link_qubits[link_index]
    return op.embed(layout.total_qubits, start)
