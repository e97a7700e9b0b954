"""Product-formula synthesis, the neutrino SWAP network and Trotter error models."""
from __future__ import annotations

import math
import warnings
from functools import lru_cache
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .circuit import Circuit, Gate, one_qubit_matrix
from .neutrino import NeutrinoEnsemble, one_body
from .pauli import PauliString, PauliSum

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0 + 0j, -1.0])
_Y = np.array([[0, -1j], [1j, 0]])
_XX, _YY, _ZZ = np.kron(_X, _X), np.kron(_Y, _Y), np.kron(_Z, _Z)


@dataclass(frozen=True)
class TrotterPlan:
    order: int = 1
    n_steps: int = 1
    term_order: str = "descending"  # or "given"

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2 (got {self.order})")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.term_order not in ("descending", "given"):
            raise ValueError(f"unknown term order {self.term_order!r}")


def ordered_terms(h: PauliSum, plan: TrotterPlan, tol: float = 1e-12) -> tuple[list[tuple[float, PauliString]], float]:
    """Real-coefficient non-identity terms in plan order, plus the identity coefficient."""
    s = h.simplify()
    if np.any(np.abs(s.coeffs.imag) > tol):
        raise ValueError("Trotter synthesis needs real coefficients")
    ident = 0.0
    terms = []
    for c, p in s.terms:
        if p.weight == 0:
            ident += c.real
        else:
            terms.append((float(c.real), p))
    if plan.term_order == "descending":
        # stable sort keeps the canonical order among equal magnitudes
        terms.sort(key=lambda t: -abs(t[0]))
    return terms, ident


def _step(c: Circuit, terms, ident: float, dt: float, order: int) -> None:
    c.global_phase -= ident * dt
    if order == 1 or len(terms) == 1:
        for coeff, p in terms:
            c.pauli_rotation(p, 2 * coeff * dt)
        return
    for coeff, p in terms[:-1]:
        c.pauli_rotation(p, coeff * dt)
    coeff, p = terms[-1]
    c.pauli_rotation(p, 2 * coeff * dt)
    for coeff, p in reversed(terms[:-1]):
        c.pauli_rotation(p, coeff * dt)


def synthesize(h: PauliSum, T: float, plan: TrotterPlan) -> Circuit:
    """Product-formula circuit approximating ``exp(-i H T)``.

    Order 1 is the ordered product of term exponentials per step; order 2 is
    the symmetric (Strang) splitting with the middle term merged.
    """
    terms, ident = ordered_terms(h, plan)
    c = Circuit(h.n_qubits)
    dt = T / plan.n_steps
    for _ in range(plan.n_steps):
        _step(c, terms, ident, dt, plan.order)
    return c


def synthesize_time_dependent(builder: Callable[[float], PauliSum], T: float, plan: TrotterPlan, t0: float = 0.0) -> Circuit:
    """As :func:`synthesize` with ``H`` evaluated at the midpoint of each step."""
    dt = T / plan.n_steps
    c = None
    for k in range(plan.n_steps):
        h = builder(t0 + (k + 0.5) * dt)
        if c is None:
            c = Circuit(h.n_qubits)
        terms, ident = ordered_terms(h, plan)
        _step(c, terms, ident, dt, plan.order)
    return c


# -- neutrino SWAP network --------------------------------------------------


def _two_qubit(name: str, q: int, angle: float | None) -> np.ndarray:
    u = one_qubit_matrix(name, angle)
    return np.kron(u, np.eye(2)) if q == 1 else np.kron(np.eye(2), u)


_CNOT_10 = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)  # control 0
_CNOT_01 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)  # control 1


def _canonical_sequence(a: float, b: float, c: float):
    """3-CNOT sequence for ``exp(i (a XX + b YY + c ZZ))`` on local qubits (0, 1).

    Mirrors the gates emitted by :func:`canonical_gate`.
    """
    hp = math.pi / 2
    return [
        ("RZ", (1,), -hp),
        ("CNOT", (1, 0), None),
        ("RZ", (0,), -2 * c - hp),
        ("RY", (1,), 2 * a + hp),
        ("CNOT", (0, 1), None),
        ("RY", (1,), -2 * b - hp),
        ("CNOT", (1, 0), None),
        ("RZ", (0,), hp),
    ]


# the sequence equals e^{-i pi/4} exp(i (a XX + b YY + c ZZ)) for all angles;
# sequence_phase recomputes it numerically (used by the tests)
CANONICAL_PHASE = -math.pi / 4


def sequence_phase(seq, a: float, b: float, c: float) -> float:
    u = np.eye(4, dtype=complex)
    for name, qs, ang in seq:
        if name == "CNOT":
            g = _CNOT_10 if qs[0] == 0 else _CNOT_01
        else:
            g = _two_qubit(name, qs[0], ang)
        u = g @ u
    # XX, YY and ZZ commute, so the exponential factorizes
    target = np.eye(4, dtype=complex)
    for w, m in ((a, _XX), (b, _YY), (c, _ZZ)):
        target = target @ (math.cos(w) * np.eye(4) + 1j * math.sin(w) * m)
    return float(np.angle(np.trace(u.conj().T @ target)))


_mk = tuple.__new__  # skips the NamedTuple keyword wrapper on this hot path
_HP = math.pi / 2


@lru_cache(maxsize=None)
def _fixed_gates(q0: int, q1: int) -> tuple:
    """Angle-independent gates of the canonical block; Gates are immutable, so share them."""
    return (
        Gate("RZ", (q1,), -_HP),
        Gate("CNOT", (q1, q0)),
        Gate("CNOT", (q0, q1)),
        Gate("RZ", (q0,), _HP),
    )


def _canonical_gates(q0: int, q1: int, a: float, b: float, c: float) -> tuple:
    rz_in, cx_10, cx_01, rz_out = _fixed_gates(q0, q1)
    return (
        rz_in,
        cx_10,
        _mk(Gate, ("RZ", (q0,), -2 * c - _HP, 0, 0)),
        _mk(Gate, ("RY", (q1,), 2 * a + _HP, 0, 0)),
        cx_01,
        _mk(Gate, ("RY", (q1,), -2 * b - _HP, 0, 0)),
        cx_10,
        rz_out,
    )


def canonical_gate(circ: Circuit, q0: int, q1: int, a: float, b: float, c: float) -> None:
    """Append ``exp(i (a XX + b YY + c ZZ))`` on ``(q0, q1)`` with 3 CNOTs, phase exact."""
    circ._check(q0, q1)
    circ.gates.extend(_canonical_gates(q0, q1, a, b, c))
    circ.global_phase += CANONICAL_PHASE


def _one_body_layer(circ: Circuit, coeffs, perm, tau: float) -> None:
    """``exp(-i tau (bx X + bz Z))`` per wire as ``RY(phi) RZ(2 tau r) RY(-phi)``."""
    append = circ.gates.append
    for w, logical in enumerate(perm):
        bx, bz = coeffs[logical]
        r = math.hypot(bx, bz)
        if r == 0:
            continue
        phi = math.atan2(bx, bz)
        q = (w,)
        append(_mk(Gate, ("RY", q, -phi, 0, 0)))
        append(_mk(Gate, ("RZ", q, 2 * tau * r, 0, 0)))
        append(_mk(Gate, ("RY", q, phi, 0, 0)))


def _coupling_matrix(e: NeutrinoEnsemble, t: float) -> np.ndarray:
    """``mu(t)/(2N) (1 - cos theta_ij)`` for all pairs at once."""
    p = np.asarray(e.momenta)
    return e.mu(t) / (2.0 * e.N) * np.maximum(0.0, 1.0 - p @ p.T)


def _layers(n: int) -> list[list[int]]:
    return [list(range(k % 2, n - 1, 2)) for k in range(n)]


def neutrino_swap_network(e: NeutrinoEnsemble, dt: float, order: int = 1, n_steps: int = 1, t0: float = 0.0) -> Circuit:
    """Trotter steps of the collective-neutrino Hamiltonian on a line.

    Every layer applies, on neighbouring wires, the pair interaction fused
    with a SWAP (a single 3-CNOT canonical gate). ``N`` odd-even layers bring
    every pair together once and reverse the wire order. Order 2 runs the
    network forward and backward with half steps, merging the two middle
    layers into one SWAP-free gate. ``output_permutation[w]`` is the neutrino
    held by wire ``w`` at the end.
    """
    n = e.N
    if n < 2:
        raise ValueError("the SWAP network needs N >= 2")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    circ = Circuit(n)
    perm = list(range(n))
    layers = _layers(n)
    quarter = math.pi / 4

    extend = circ.gates.extend

    def pair_layer(pairs, tau, with_swap):
        for p in pairs:
            i, j = perm[p], perm[p + 1]
            theta = -coupling[i][j] * tau
            if with_swap:
                # exp(i pi/4 (XX + YY + ZZ)) = e^{i pi/4} SWAP
                extend(_canonical_gates(p, p + 1, theta + quarter, theta + quarter, theta + quarter))
                circ.global_phase += CANONICAL_PHASE - quarter
                perm[p], perm[p + 1] = j, i
            else:
                extend(_canonical_gates(p, p + 1, theta, theta, theta))
                circ.global_phase += CANONICAL_PHASE

    for k in range(n_steps):
        t = t0 + (k + 0.5) * dt
        coupling = _coupling_matrix(e, t).tolist()
        ob = one_body(e, t)
        if order == 1:
            _one_body_layer(circ, ob, perm, dt)
            for pairs in layers:
                pair_layer(pairs, dt, True)
        else:
            _one_body_layer(circ, ob, perm, dt / 2)
            for pairs in layers[:-1]:
                pair_layer(pairs, dt / 2, True)
            pair_layer(layers[-1], dt, False)
            for pairs in reversed(layers[:-1]):
                pair_layer(pairs, dt / 2, True)
            _one_body_layer(circ, ob, perm, dt / 2)
    circ.output_permutation = tuple(perm)
    return circ


def neutrino_count_formula(N: int, order: int) -> tuple[float, float]:
    """Closed-form (CNOT count, CNOT depth) per step as quoted for the network."""
    if order == 1:
        return 3 * N * (N - 1) / 2, 3 * N
    return 3 * (N * N - 1.5 * N + 1), 6 * N - 3


# -- error models -----------------------------------------------------------


def error_bound(alpha_c: float, T: float, n: int, order: int = 1, scope: str = "global") -> float:
    """Product-formula error model ``alpha_c (T/n)^(p+1)`` per step.

    ``scope="step"`` returns the per-step value, ``"global"`` multiplies by
    the ``n`` steps (``alpha_c T^2 / n`` at first order).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if alpha_c < 0:
        raise ValueError("alpha_c must be non-negative")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    per_step = alpha_c * (T / n) ** (order + 1)
    if scope == "step":
        return per_step
    if scope == "global":
        return n * per_step
    raise ValueError(f"unknown scope {scope!r}")


@dataclass(frozen=True)
class StepChoice:
    n_star: int  # argmin of alpha (T/n)^2 + (n0 eps)^n
    n_star_linear: int  # argmin of alpha (T/n)^2 + n n0 eps
    n_closed_form: float  # continuous optimum of the linear model, (2 alpha T^2 / (n0 eps))^(1/3)
    monotone: bool  # the as-written model has no interior trade-off
    error_as_written: float
    error_linear: float


def optimal_steps(alpha_c: float, T: float, n0: int, eps_2g: float, n_max: int = 10_000) -> StepChoice:
    """Step count minimizing Trotter error plus accumulated gate noise.

    Two noise models are scanned over ``n in [1, n_max]``: the geometric
    ``(n0 eps)^n`` and the linear accumulation ``n n0 eps``.
    """
    if not 0 <= eps_2g < 1:
        raise ValueError("eps_2g must lie in [0, 1)")
    if n0 < 1:
        raise ValueError("n0 must be >= 1")
    n = np.arange(1, n_max + 1, dtype=float)
    trotter = alpha_c * (T / n) ** 2
    rate = n0 * eps_2g
    monotone = rate >= 1
    if monotone:
        warnings.warn(f"n0 * eps_2g = {rate:g} >= 1: the geometric noise term grows with n", RuntimeWarning, stacklevel=2)
        n_star = 1
        err_w = float(trotter[0] + rate)
    else:
        with np.errstate(under="ignore"):
            geo = np.power(rate, n)
        as_written = trotter + geo
        # the objective is non-increasing once geo underflows; take the last tie
        i = int(np.flatnonzero(as_written == as_written.min())[-1])
        n_star, err_w = i + 1, float(as_written[i])
    linear = trotter + n * rate
    j = int(np.argmin(linear))
    closed = (2 * alpha_c * T * T / rate) ** (1 / 3) if rate > 0 else math.inf
    return StepChoice(n_star, j + 1, closed, monotone, err_w, float(linear[j]))
