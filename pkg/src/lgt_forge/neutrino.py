"""Two-flavor collective neutrino Hamiltonian, one qubit per neutrino.

``H(t) = sum_i b_i . sigma_i + lambda_e(t) sum_i Z_i
         + mu(t)/(2N) sum_{i<j} (1 - cos theta_ij) sigma_i . sigma_j``

with ``b_i = scale * dm2 / (4 E_i) * (sin 2theta, 0, -cos 2theta)``. Qubit
``|0>`` is the electron flavor. ``scale`` converts ``dm2/E`` into the inverse
time unit of the simulation; tests use dimensionless couplings (scale 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli import PauliString, PauliSum, DEFAULT_TOL


@dataclass(frozen=True)
class Profile:
    """Piecewise-linear coupling ``f(t)``; constant beyond the table ends."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values) or not self.times:
            raise ValueError("profile needs matching, non-empty time and value tables")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("profile times must be strictly increasing")

    @classmethod
    def constant(cls, value: float) -> "Profile":
        return cls((0.0,), (float(value),))

    @classmethod
    def coerce(cls, spec) -> "Profile":
        """Accept a scalar, a ``[[t, v], ...]`` table, or a Profile."""
        if isinstance(spec, Profile):
            return spec
        if isinstance(spec, (int, float)):
            return cls.constant(spec)
        rows = [tuple(map(float, r)) for r in spec]
        if any(len(r) != 2 for r in rows):
            raise ValueError("profile table rows must be [t, value] pairs")
        return cls(tuple(r[0] for r in rows), tuple(r[1] for r in rows))

    def __call__(self, t: float) -> float:
        if len(self.times) == 1:
            return self.values[0]
        return float(np.interp(t, self.times, self.values))

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)


@dataclass(frozen=True)
class NeutrinoEnsemble:
    N: int
    delta_m2: float
    theta_v: float
    energies: tuple[float, ...]
    momenta: tuple[tuple[float, float, float], ...]
    lambda_e: Profile = field(default_factory=lambda: Profile.constant(0.0))
    mu: Profile = field(default_factory=lambda: Profile.constant(0.0))
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "energies", tuple(float(e) for e in self.energies))
        object.__setattr__(self, "momenta", tuple(tuple(float(c) for c in p) for p in self.momenta))
        object.__setattr__(self, "lambda_e", Profile.coerce(self.lambda_e))
        object.__setattr__(self, "mu", Profile.coerce(self.mu))
        if self.N < 1:
            raise ValueError("ensemble needs N >= 1")
        if len(self.energies) != self.N or len(self.momenta) != self.N:
            raise ValueError(f"expected {self.N} energies and momenta")
        if any(e <= 0 for e in self.energies):
            raise ValueError("neutrino energies must be positive")
        for p in self.momenta:
            if len(p) != 3 or abs(math.sqrt(sum(c * c for c in p)) - 1.0) > 1e-12:
                raise ValueError(f"momentum direction {p} is not a unit 3-vector")

    def b_vector(self, i: int) -> np.ndarray:
        w = self.scale * self.delta_m2 / (4.0 * self.energies[i])
        return w * np.array([math.sin(2 * self.theta_v), 0.0, -math.cos(2 * self.theta_v)])

    def angular_factor(self, i: int, j: int) -> float:
        """``1 - cos theta_ij`` (exactly zero for collinear momenta)."""
        c = float(np.dot(self.momenta[i], self.momenta[j]))
        return max(0.0, 1.0 - c)


def build_h(e: NeutrinoEnsemble, t: float = 0.0, tol: float = DEFAULT_TOL) -> PauliSum:
    n = e.N
    terms = []
    lam = e.lambda_e(t)
    for i in range(n):
        bx, _, bz = e.b_vector(i)
        terms.append((bx, PauliString.single(n, i, "X")))
        terms.append((bz + lam, PauliString.single(n, i, "Z")))
    mu = e.mu(t)
    for i in range(n):
        for j in range(i + 1, n):
            c = mu / (2.0 * n) * e.angular_factor(i, j)
            for k in "XYZ":
                terms.append((c, PauliString.single(n, i, k) @ PauliString.single(n, j, k)))
    return PauliSum.from_terms(n, terms).simplify(tol)


def one_body(e: NeutrinoEnsemble, t: float = 0.0) -> list[tuple[float, float]]:
    """Per-neutrino (X, Z) coefficients of the one-body part."""
    lam = e.lambda_e(t)
    return [(float(e.b_vector(i)[0]), float(e.b_vector(i)[2] + lam)) for i in range(e.N)]


def mass_axis_generator(e: NeutrinoEnsemble) -> PauliSum:
    """``sum_i bhat . sigma_i``, the global rotation about the mass axis; commutes with ``H`` when ``lambda_e = 0``."""
    n = e.N
    s, c = math.sin(2 * e.theta_v), -math.cos(2 * e.theta_v)
    terms = []
    for i in range(n):
        terms.append((s, PauliString.single(n, i, "X")))
        terms.append((c, PauliString.single(n, i, "Z")))
    return PauliSum.from_terms(n, terms).simplify()


def total_spin_squared(n: int) -> PauliSum:
    """``(sum_i sigma_i)^2`` as a Pauli sum."""
    out = PauliSum.zero(n)
    for k in "XYZ":
        s = PauliSum.from_terms(n, [(1.0, PauliString.single(n, i, k)) for i in range(n)])
        out = out + s @ s
    return out.simplify()


def survival_probability_oracle(e: NeutrinoEnsemble, t: float) -> float:
    """``P(nu_e -> nu_e)`` for one neutrino in vacuum: ``1 - sin^2(2theta) sin^2(|b| t)``."""
    if e.N != 1:
        raise ValueError("the closed form covers a single neutrino")
    if not e.lambda_e.is_zero:
        raise ValueError("the closed form assumes lambda_e = 0")
    w = float(np.linalg.norm(e.b_vector(0)))
    return 1.0 - math.sin(2 * e.theta_v) ** 2 * math.sin(w * t) ** 2


def random_directions(n: int, rng: np.random.Generator) -> list[tuple[float, float, float]]:
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return [tuple(map(float, r)) for r in v]


def make_ensemble(n: int, rng: np.random.Generator | None = None, *, delta_m2=1.0, theta_v=0.3,
                  mu: float = 1.0, lambda_e: float = 0.0, energies: Sequence[float] | None = None) -> NeutrinoEnsemble:
    """Convenience constructor with random directions (seeded)."""
    rng = rng or np.random.default_rng(0)
    energies = list(energies) if energies is not None else [1.0 + 0.5 * i for i in range(n)]
    return NeutrinoEnsemble(n, delta_m2, theta_v, tuple(energies), tuple(random_directions(n, rng)),
                            Profile.constant(lambda_e), Profile.constant(mu))
