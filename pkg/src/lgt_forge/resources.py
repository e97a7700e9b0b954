"""Pauli-string scaling laws for the lattice QED terms and empirical checks.

The symbolic table gives the growth class of each Hamiltonian term per link
encoding. The empirical side counts simplified Pauli strings of the operators
this package actually builds and fits a log-log exponent against ``d_S``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .encoding import LinkTruncation, Scheme, jw_op, link_E2, link_U, number_op
from .lattice import Geometry
from .pauli import PauliSum, product


class ResourceScheme(str, Enum):
    LOGARITHMIC = "logarithmic"
    LOGARITHMIC_PERFECT = "logarithmic_perfect"
    LINEAR = "linear"


TERM_NAMES = ("mass", "hopping", "wilson", "electric", "plaquette")

# powers of (n_s, d, n_spinor, d_S) per term and scheme
_TABLE: dict[str, dict[ResourceScheme, dict[str, int]]] = {
    "mass": {s: {"n_s": 1, "n_spinor": 1} for s in ResourceScheme},
    "hopping": {
        ResourceScheme.LOGARITHMIC: {"n_s": 1, "d": 1, "n_spinor": 2, "d_S": 2},
        ResourceScheme.LOGARITHMIC_PERFECT: {"n_s": 1, "d": 1, "n_spinor": 2, "d_S": 1},
        ResourceScheme.LINEAR: {"n_s": 1, "d": 1, "n_spinor": 2, "d_S": 1},
    },
    "wilson": {
        ResourceScheme.LOGARITHMIC: {"n_s": 1, "d": 1, "n_spinor": 2, "d_S": 2},
        ResourceScheme.LOGARITHMIC_PERFECT: {"n_s": 1, "d": 1, "n_spinor": 2, "d_S": 1},
        ResourceScheme.LINEAR: {"n_s": 1, "d": 1, "n_spinor": 2, "d_S": 1},
    },
    "electric": {
        ResourceScheme.LOGARITHMIC: {"n_s": 1, "d": 1, "d_S": 1},
        ResourceScheme.LOGARITHMIC_PERFECT: {"n_s": 1, "d": 1, "d_S": 1},
        ResourceScheme.LINEAR: {"n_s": 1, "d": 1, "d_S": 2},
    },
    "plaquette": {
        ResourceScheme.LOGARITHMIC: {"n_s": 1, "d": 1, "d_S": 8},
        ResourceScheme.LOGARITHMIC_PERFECT: {"n_s": 1, "d": 1, "d_S": 4},
        ResourceScheme.LINEAR: {"n_s": 1, "d": 1, "d_S": 4},
    },
}
_ORDER = ("n_s", "d", "n_spinor", "d_S")

# qubit counts quoted for the benchmark systems: (min, max)
TABLE_I_QUBITS = {
    "qed2p1_static": (30, 160),
    "qed1p1_dynamics": (30, 100),
    "neutrino": (10, 40),
}


@dataclass(frozen=True)
class ResourceParams:
    n_s: int
    n_e: int
    n_p: int
    n_spinor: int = 1
    d: int = 2
    d_S: int = 3
    scheme: ResourceScheme = ResourceScheme.LOGARITHMIC

    def __post_init__(self):
        object.__setattr__(self, "scheme", ResourceScheme(self.scheme))
        for name in ("n_s", "n_e", "n_p"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.n_spinor < 1 or self.d < 1 or self.d_S < 1:
            raise ValueError("n_spinor, d and d_S must be positive")

    @classmethod
    def from_geometry(cls, g: Geometry, t: LinkTruncation, n_spinor: int = 1) -> "ResourceParams":
        if t.perfect:
            scheme = ResourceScheme.LOGARITHMIC_PERFECT
        else:
            scheme = ResourceScheme(t.scheme.value)
        p = cls(g.n_sites, g.n_links, g.n_plaquettes, n_spinor, 2, t.d_S, scheme)
        p.check_regular()
        return p

    def check_regular(self) -> None:
        """Edges and plaquettes of a regular lattice are bounded by ``d n_s`` and ``d(d-1)/2 n_s``."""
        if self.n_e > self.d * self.n_s:
            raise ValueError(f"{self.n_e} edges exceed d*n_s = {self.d * self.n_s}")
        if self.n_p > self.d * (self.d - 1) // 2 * self.n_s:
            raise ValueError(f"{self.n_p} plaquettes exceed the regular-lattice bound")


@dataclass(frozen=True)
class ScalingClass:
    powers: tuple[tuple[str, int], ...]

    @classmethod
    def of(cls, powers: dict[str, int]) -> "ScalingClass":
        return cls(tuple((k, powers[k]) for k in _ORDER if powers.get(k)))

    def power(self, name: str) -> int:
        return dict(self.powers).get(name, 0)

    def label(self) -> str:
        parts = [k if e == 1 else f"{k}^{e}" for k, e in self.powers]
        return "O(" + " ".join(parts) + ")"

    def evaluate(self, p: ResourceParams) -> int:
        return math.prod(getattr(p, k) ** e for k, e in self.powers)


@dataclass
class TermScaling:
    term: str
    scheme: str
    scaling: ScalingClass
    value: int | None = None
    d_S: list[int] = field(default_factory=list)
    counts: list[int] = field(default_factory=list)
    exponent: float | None = None
    ci: tuple[float, float] | None = None
    n_points: int = 0
    symbolic_only: bool = False

    def to_dict(self) -> dict:
        return {
            "term": self.term,
            "scheme": self.scheme,
            "class": self.scaling.label(),
            "expected_exponent": self.scaling.power("d_S"),
            "value": self.value,
            "d_S": list(self.d_S),
            "counts": list(self.counts),
            "exponent": self.exponent,
            "ci": list(self.ci) if self.ci else None,
            "n_points": self.n_points,
            "symbolic_only": self.symbolic_only,
        }


@dataclass
class ScalingReport:
    rows: list[TermScaling]

    def __getitem__(self, term: str) -> TermScaling:
        for r in self.rows:
            if r.term == term:
                return r
        raise KeyError(term)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["term", "scheme", "d_S", "count"])
        for r in self.rows:
            for d, c in zip(r.d_S, r.counts):
                w.writerow([r.term, r.scheme, d, c])
        return buf.getvalue()

    def summary(self) -> dict:
        return {f"{r.term}/{r.scheme}": r.to_dict() for r in self.rows}

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def scaling_table(p: ResourceParams) -> ScalingReport:
    rows = []
    for term in TERM_NAMES:
        cls = ScalingClass.of(_TABLE[term][p.scheme])
        rows.append(TermScaling(term, p.scheme.value, cls, value=cls.evaluate(p), symbolic_only=term == "wilson"))
    return ScalingReport(rows)


def expected_class(term: str, scheme: ResourceScheme | str) -> ScalingClass:
    return ScalingClass.of(_TABLE[term][ResourceScheme(scheme)])


# -- operators counted per link / plaquette -----------------------------------


def electric_term(t: LinkTruncation) -> PauliSum:
    return link_E2(t)


def single_u(t: LinkTruncation) -> PauliSum:
    return link_U(t)


def hopping_pair(t: LinkTruncation) -> PauliSum:
    """Hermitian hop ``c0^dag U c1 + h.c.`` on two fermion qubits and one link."""
    q = t.qubits_per_link
    n = 2 + q
    u = link_U(t).embed(n, 2)
    hop = jw_op(0, "create", n) @ u @ jw_op(1, "annihilate", n)
    return (hop + hop.dagger()).simplify()


def plaquette_term(t: LinkTruncation) -> PauliSum:
    """``P + P^dag`` with ``P = U U U^dag U^dag`` on four link registers."""
    u = link_U(t)
    q = t.qubits_per_link
    n = 4 * q
    factors = [(u if s > 0 else u.dagger()).embed(n, k * q) for k, s in enumerate((1, 1, -1, -1))]
    p = product(factors)
    return (p + p.dagger()).simplify()


def mass_term(t: LinkTruncation) -> PauliSum:
    return number_op(0, 1)


BUILDERS: dict[str, Callable[[LinkTruncation], PauliSum]] = {
    "electric": electric_term,
    "hopping": hopping_pair,
    "single_u": single_u,
    "plaquette": plaquette_term,
    "mass": mass_term,
}


def truncation_for(l: int, scheme: ResourceScheme | str) -> LinkTruncation:
    scheme = ResourceScheme(scheme)
    if scheme is ResourceScheme.LOGARITHMIC_PERFECT:
        return LinkTruncation(l, Scheme.LOGARITHMIC, perfect=True)
    return LinkTruncation(l, Scheme(scheme.value))


def fit_exponent(d_S: Sequence[int], counts: Sequence[int], fit_points: int = 3,
                 confidence: float = 0.95) -> tuple[float, tuple[float, float]]:
    """Least-squares slope of ``log count`` vs ``log d_S`` over the largest points."""
    x = np.log(np.asarray(d_S, dtype=float))[-fit_points:]
    y = np.log(np.asarray(counts, dtype=float))[-fit_points:]
    if np.ptp(x) == 0:
        raise ValueError("fit needs at least two distinct d_S values")
    res = stats.linregress(x, y)
    dof = len(x) - 2
    if dof > 0 and np.isfinite(res.stderr):
        half = float(stats.t.ppf(0.5 + confidence / 2, dof) * res.stderr)
    else:
        half = 0.0
    slope = float(res.slope)
    return slope, (slope - half, slope + half)


def empirical_counts(builder: Callable[[LinkTruncation], PauliSum], sweep: Iterable[int],
                     scheme: ResourceScheme | str = ResourceScheme.LOGARITHMIC, term: str = "",
                     fit_points: int = 3, min_points: int = 4) -> TermScaling:
    """Count Pauli strings of ``builder(truncation)`` for each ``l`` in ``sweep``."""
    sweep = sorted(set(int(l) for l in sweep))
    if len(sweep) < min_points:
        raise ValueError(f"sweep has {len(sweep)} points, at least {min_points} needed for a fit")
    scheme = ResourceScheme(scheme)
    ds, counts = [], []
    for l in sweep:
        t = truncation_for(l, scheme)
        ds.append(t.d_S)
        counts.append(len(builder(t).simplify()))
    exponent, ci = fit_exponent(ds, counts, min(fit_points, len(ds)))
    table_term = {"single_u": "hopping"}.get(term, term)
    cls = expected_class(table_term, scheme) if table_term in _TABLE else ScalingClass(())
    return TermScaling(term or getattr(builder, "__name__", "custom"), scheme.value, cls,
                       d_S=ds, counts=counts, exponent=exponent, ci=ci, n_points=len(ds))


@dataclass
class DominanceCheck:
    scheme: str
    d_S: list[int]
    counts: dict[str, list[int]]
    holds: bool

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "d_S": self.d_S, "counts": self.counts, "holds": self.holds}


def plaquette_dominance(sweep: Iterable[int], scheme: ResourceScheme | str = ResourceScheme.LINEAR,
                        others: Sequence[str] = ("electric", "hopping", "mass")) -> DominanceCheck:
    """Plaquette strings vs every other per-unit term at each swept ``d_S >= 3``."""
    scheme = ResourceScheme(scheme)
    ds: list[int] = []
    counts: dict[str, list[int]] = {k: [] for k in ("plaquette", *others)}
    holds = True
    for l in sorted(set(sweep)):
        t = truncation_for(l, scheme)
        ds.append(t.d_S)
        for k in counts:
            counts[k].append(len(BUILDERS[k](t)))
        if t.d_S >= 3:
            holds &= all(counts["plaquette"][-1] > counts[k][-1] for k in others)
    return DominanceCheck(scheme.value, ds, counts, holds)


# -- qubit budgets ------------------------------------------------------------


def qubit_budget(g: Geometry, t: LinkTruncation) -> int:
    return g.n_sites + g.n_links * t.qubits_per_link


def neutrino_qubit_budget(n: int) -> int:
    return n


@dataclass(frozen=True)
class BudgetComparison:
    system: str
    ours: tuple[int, int]
    quoted: tuple[int, int]
    note: str

    @property
    def agrees(self) -> bool:
        return self.ours == self.quoted

    def to_dict(self) -> dict:
        return {"system": self.system, "ours": list(self.ours), "quoted": list(self.quoted),
                "agrees": self.agrees, "note": self.note}


def _chain_budget(n_sites: int, t: LinkTruncation) -> int:
    return n_sites + (n_sites - 1) * t.qubits_per_link


def table_i_comparison(scheme: str = "logarithmic") -> list[BudgetComparison]:
    """Budgets for the benchmark systems next to the quoted qubit numbers."""
    from .lattice import LatticeSpec, build_geometry

    lo, hi = truncation_for(2, scheme), truncation_for(3, scheme)
    small = qubit_budget(build_geometry(LatticeSpec(4, 4)), lo)
    large = qubit_budget(build_geometry(LatticeSpec(8, 8)), hi)
    out = [BudgetComparison(
        "qed2p1_static", (small, large), TABLE_I_QUBITS["qed2p1_static"],
        f"open 4x4 l=2 / 8x8 l=3, {scheme} links; sites + links * qubits_per_link",
    )]
    chain = (_chain_budget(12, lo), _chain_budget(20, hi))
    out.append(BudgetComparison(
        "qed1p1_dynamics", chain, TABLE_I_QUBITS["qed1p1_dynamics"],
        f"open chains of 12 / 20 sites, l=2 / l=3, {scheme} links",
    ))
    out.append(BudgetComparison(
        "neutrino", (neutrino_qubit_budget(10), neutrino_qubit_budget(40)), TABLE_I_QUBITS["neutrino"],
        "one qubit per neutrino",
    ))
    return out
