"""Variational ground states, excited states and McLachlan dynamics.

Every parameterized operation is ``exp(-i w theta G / 2)`` with ``G^2 = I``
(a Pauli string or a gauge-invariant involution), or a diagonal phase that
is a product of commuting Z-string rotations. A parameter may occur in many
operations; its derivative is the sum over occurrences. Each occurrence
admits the exact two-term shift rule, which :func:`gradient` uses.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import weakref
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import kernels
from .circuit import Gate
from .pauli import PauliString, PauliSum
from .statevector import Propagator, StateVector, _apply_gate

_PHASES = (1.0, 1j, -1.0, -1j)


# -- parameterized operations ----------------------------------------------


class PauliOp:
    """``exp(-i w theta P / 2)``."""

    def __init__(self, param: int, p: PauliString, weight: float = 1.0):
        if p.phase % 2:
            raise ValueError("generator must be Hermitian")
        self.param = param
        self.weight = float(weight) * (-1.0 if p.phase == 2 else 1.0)
        self.x, self.z, self.ny = p.x, p.z, p.n_y
        self.label = p.label
        self.n_sub = 1

    def apply(self, a: np.ndarray, theta: float, delta: float = 0.0, sub: int = 0) -> None:
        kernels.pauli_rotation(a, self.x, self.z, self.ny, self.weight * theta + delta)

    def unapply(self, a: np.ndarray, theta: float) -> None:
        kernels.pauli_rotation(a, self.x, self.z, self.ny, -self.weight * theta)

    def generator(self, a: np.ndarray) -> np.ndarray:
        """``K a`` with ``dU/dtheta = -i K U``."""
        out = np.zeros_like(a)
        kernels.apply_pauli(a, out, self.x, self.z, 0.5 * self.weight * _PHASES[self.ny % 4])
        return out

    def sub_weights(self) -> list[float]:
        return [self.weight]


class InvolutionOp:
    """``exp(-i w theta G / 2) = cos(w theta / 2) - i sin(w theta / 2) G`` for ``G^2 = I``."""

    def __init__(self, param: int, g: sp.spmatrix, weight: float = 1.0, label: str = "G"):
        self.param = param
        self.g = sp.csr_matrix(g)
        self.weight = float(weight)
        self.label = label
        self.n_sub = 1

    def apply(self, a: np.ndarray, theta: float, delta: float = 0.0, sub: int = 0) -> None:
        phi = self.weight * theta + delta
        ga = self.g @ a
        a *= math.cos(phi / 2)
        a += (-1j * math.sin(phi / 2)) * ga

    def unapply(self, a: np.ndarray, theta: float) -> None:
        self.apply(a, -theta)

    def generator(self, a: np.ndarray) -> np.ndarray:
        return (0.5 * self.weight) * (self.g @ a)

    def sub_weights(self) -> list[float]:
        return [self.weight]


class DiagonalOp:
    """``prod_i exp(-i w_i theta Z_i / 2)`` over commuting Z strings, applied in one pass."""

    def __init__(self, param: int, n_qubits: int, zmasks: Sequence[int], weights: Sequence[float], label: str = "D"):
        self.param = param
        self.zmasks = [int(z) for z in zmasks]
        self.weights = np.asarray(weights, dtype=float)
        self.label = label
        idx = np.arange(1 << n_qubits, dtype=np.uint64)
        self.signs = np.array([1.0 - 2.0 * (np.bitwise_count(idx & np.uint64(z)) & 1) for z in self.zmasks])
        self.d = 0.5 * (self.weights @ self.signs) if len(self.zmasks) else np.zeros(1 << n_qubits)
        self.n_sub = len(self.zmasks)

    def apply(self, a: np.ndarray, theta: float, delta: float = 0.0, sub: int = 0) -> None:
        phase = theta * self.d
        if delta:
            phase = phase + 0.5 * delta * self.signs[sub]
        a *= np.exp(-1j * phase)

    def unapply(self, a: np.ndarray, theta: float) -> None:
        a *= np.exp(1j * theta * self.d)

    def generator(self, a: np.ndarray) -> np.ndarray:
        return self.d * a

    def sub_weights(self) -> list[float]:
        return list(self.weights)


_INVERSE = {"S": "SDG", "SDG": "S"}


class FixedOp:
    param = None
    n_sub = 0

    def __init__(self, gate: Gate):
        self.gate = gate
        self.label = gate.name
        inv_angle = None if gate.angle is None else -gate.angle
        self.inverse = Gate(_INVERSE.get(gate.name, gate.name), gate.qubits, inv_angle)

    def apply(self, a: np.ndarray, theta=None, delta: float = 0.0, sub: int = 0) -> None:
        _apply_gate(a, self.gate, True)

    def unapply(self, a: np.ndarray, theta=None) -> None:
        _apply_gate(a, self.inverse, True)


# -- ansatz ----------------------------------------------------------------


@dataclass
class Ansatz:
    n_qubits: int
    ops: list
    n_params: int
    family: str = "custom"
    reference: int | np.ndarray = 0
    param_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        used = {op.param for op in self.ops if op.param is not None}
        if used != set(range(self.n_params)):
            raise ValueError("every parameter index must be used by at least one operation")

    def reference_state(self) -> np.ndarray:
        if isinstance(self.reference, (int, np.integer)):
            a = np.zeros(1 << self.n_qubits, dtype=complex)
            a[int(self.reference)] = 1.0
            return a
        return np.asarray(self.reference, dtype=complex).copy()

    def _check(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {theta.shape}")
        return theta

    def prepare(self, theta, shift: tuple[int, int, float] | None = None) -> np.ndarray:
        """Amplitudes of ``|Phi(theta)>``; ``shift=(op, sub, delta)`` perturbs one occurrence."""
        theta = self._check(theta)
        a = self.reference_state()
        for j, op in enumerate(self.ops):
            t = None if op.param is None else theta[op.param]
            if shift is not None and shift[0] == j:
                op.apply(a, t, shift[2], shift[1])
            else:
                op.apply(a, t)
        return a

    def state(self, theta) -> StateVector:
        return StateVector(self.n_qubits, self.prepare(theta))

    def occurrences(self) -> list[tuple[int, int, int, float]]:
        """``(op index, sub-term, parameter, weight)`` for every shiftable occurrence."""
        out = []
        for j, op in enumerate(self.ops):
            if op.param is None:
                continue
            for s, w in enumerate(op.sub_weights()):
                out.append((j, s, op.param, w))
        return out

    def tangents(self, theta) -> tuple[np.ndarray, np.ndarray]:
        """``(|Phi>, D)`` with ``D[k] = d|Phi>/d theta_k``."""
        theta = self._check(theta)
        a = self.reference_state()
        tang = np.zeros((self.n_params, a.shape[0]), dtype=complex)
        seen = np.zeros(self.n_params, dtype=bool)
        for op in self.ops:
            t = None if op.param is None else theta[op.param]
            op.apply(a, t)
            for k in np.nonzero(seen)[0]:
                op.apply(tang[k], t)
            if op.param is not None:
                tang[op.param] += -1j * op.generator(a)
                seen[op.param] = True
        return a, tang


def hardware_efficient(n_qubits: int, layers: int, rotations: Sequence[str] = ("Y", "Z"),
                       entangler: str = "linear", reference: int = 0) -> Ansatz:
    """Layers of single-qubit rotations followed by a CNOT chain; final rotation layer."""
    ops, k, names = [], 0, []
    for layer in range(layers + 1):
        for q in range(n_qubits):
            for r in rotations:
                ops.append(PauliOp(k, PauliString.single(n_qubits, q, r)))
                names.append(f"R{r}[{layer},{q}]")
                k += 1
        if layer == layers:
            break
        pairs = [(q, q + 1) for q in range(n_qubits - 1)]
        if entangler == "circular" and n_qubits > 2:
            pairs.append((n_qubits - 1, 0))
        for c, t in pairs:
            ops.append(FixedOp(Gate("CNOT", (c, t))))
    return Ansatz(n_qubits, ops, k, "hardware_efficient", reference, names)


def pauli_rotation_ansatz(strings: Sequence[PauliString], layers: int = 1, reference: int | np.ndarray = 0) -> Ansatz:
    """One independent rotation per string per layer."""
    n = strings[0].n_qubits
    ops, names = [], []
    for layer in range(layers):
        for p in strings:
            ops.append(PauliOp(len(ops), p))
            names.append(f"{p.label}[{layer}]")
    return Ansatz(n, ops, len(ops), "pauli_rotations", reference, names)


def _pauli_group_ops(group: PauliSum, param: int) -> list:
    """Ops for ``exp(-i theta group)``: one diagonal pass or per-string rotations."""
    g = group.simplify()
    if np.any(np.abs(g.coeffs.imag) > 1e-12):
        raise ValueError("group must have real coefficients")
    ops = []
    keep = [(c.real, p) for c, p in g.terms if p.weight > 0]
    if g.is_diagonal():
        return [DiagonalOp(param, g.n_qubits, [p.z for _, p in keep], [2 * c for c, _ in keep])]
    for c, p in keep:
        ops.append(PauliOp(param, p, 2 * c))
    return ops


def hamiltonian_variational(groups: Sequence[PauliSum], layers: int, reference: int | np.ndarray = 0,
                            names: Sequence[str] | None = None) -> Ansatz:
    """``prod_layers prod_groups exp(-i theta_{layer,g} H_g)`` with one parameter per group and layer.

    Groups whose strings do not commute are applied string by string
    (a first-order split that still shares one parameter).
    """
    ops, pnames = [], []
    n = groups[0].n_qubits
    k = 0
    for layer in range(layers):
        for gi, g in enumerate(groups):
            new = _pauli_group_ops(g, k)
            if not new:
                continue
            ops.extend(new)
            pnames.append(f"{names[gi] if names else gi}[{layer}]")
            k += 1
    return Ansatz(n, ops, k, "hamiltonian_variational", reference, pnames)


def involution(h: sp.spmatrix, tol: float = 1e-10) -> sp.csr_matrix:
    """``G = h + I - h^2`` for Hermitian ``h`` with ``h^3 = h``; then ``G^2 = I``."""
    h = sp.csr_matrix(h)
    h2 = h @ h
    resid = h2 @ h - h
    if resid.nnz and abs(resid).max() > tol:
        raise ValueError("generator does not satisfy h^3 = h")
    g = h + sp.identity(h.shape[0], format="csr", dtype=complex) - h2
    g.eliminate_zeros()
    return g.tocsr()


def qed_variational(p, layout, layers: int, per_link: bool = True) -> Ansatz:
    """Gauge-invariant layered ansatz for the lattice QED Hamiltonian.

    Each layer applies the diagonal part (mass plus electric) as one phase,
    one involution per link built from the hopping term, and one involution
    per plaquette configuration built from the plaquette operator. Starts
    from the Dirac vacuum, so every state stays in the Gauss-law sector.
    """
    from . import qed
    from .encoding import link_projector, on_link
    from .lattice import kinetic_sign

    geo = p.geometry
    n = layout.total_qubits
    diag = (qed.h_mass(p, layout) + qed.h_electric(p, layout)).simplify()
    hop_gens = []
    for link in geo.links:
        hop = qed.hopping_term(p, layout, link.index)
        s = kinetic_sign(geo.sites[link.site], link.direction)
        hop_gens.append(involution(((hop + hop.dagger()) * s).to_sparse()))
    plaq_gens = []
    t = p.truncation
    for plaq in geo.plaquettes:
        P = qed.plaquette_operator(p, layout, plaq.index).to_sparse()
        pieces = []
        # split P by the level configuration it acts on; each piece squares to zero
        ranges = []
        for s in plaq.signs:
            # U lowers (needs level >= 1), U^dag raises (needs level <= d_S - 2)
            ranges.append(range(1, t.d_S) if s > 0 else range(0, t.d_S - 1))
        for cfg in itertools.product(*ranges):
            proj = None
            for li, k in zip(plaq.links, cfg):
                pk = on_link(link_projector(t, k), layout, li)
                proj = pk if proj is None else proj @ pk
            piece = P @ proj.to_sparse()
            piece.eliminate_zeros()
            if piece.nnz == 0:
                continue
            h = piece + piece.conj().T
            pieces.append(involution(h))
        plaq_gens.append(pieces)

    ops, names, k = [], [], 0
    for layer in range(layers):
        new = _pauli_group_ops(diag, k)
        if new:
            ops.extend(new)
            names.append(f"diag[{layer}]")
            k += 1
        if per_link:
            for li, g in enumerate(hop_gens):
                ops.append(InvolutionOp(k, g, 1.0, f"hop{li}"))
                names.append(f"hop{li}[{layer}]")
                k += 1
        else:
            for li, g in enumerate(hop_gens):
                ops.append(InvolutionOp(k, g, 1.0, f"hop{li}"))
            names.append(f"hop[{layer}]")
            k += 1
        for pi, pieces in enumerate(plaq_gens):
            for g in pieces:
                ops.append(InvolutionOp(k, g, 1.0, f"plaq{pi}"))
            names.append(f"plaq{pi}[{layer}]")
            k += 1
    ref = qed.dirac_vacuum_index(p, layout)
    return Ansatz(n, ops, k, "hamiltonian_variational", ref, names)


# -- observables -----------------------------------------------------------


class Observable:
    """Hermitian operator as a sparse matrix plus optional rank-one penalties."""

    def __init__(self, h, penalties: Sequence[tuple[float, np.ndarray]] = ()):
        if isinstance(h, PauliSum):
            if not h.is_hermitian():
                raise ValueError("observable must be Hermitian")
            self.matrix = _sparse_of(h)
            self.n_qubits = h.n_qubits
        else:
            self.matrix = sp.csr_matrix(h)
            self.n_qubits = self.matrix.shape[0].bit_length() - 1
        self.penalties = [(float(b), np.asarray(v, dtype=complex)) for b, v in penalties]

    def apply(self, a: np.ndarray) -> np.ndarray:
        out = self.matrix @ a
        for beta, v in self.penalties:
            out = out + beta * v * np.vdot(v, a)
        return out

    def value(self, a: np.ndarray) -> float:
        return float(np.vdot(a, self.apply(a)).real)


_SPARSE_CACHE: "weakref.WeakKeyDictionary[PauliSum, sp.csr_matrix]" = weakref.WeakKeyDictionary()


def _sparse_of(h: PauliSum) -> sp.csr_matrix:
    try:
        return _SPARSE_CACHE[h]
    except (KeyError, TypeError):
        m = h.to_sparse().tocsr()
        try:
            _SPARSE_CACHE[h] = m
        except TypeError:
            pass
        return m


def _as_observable(h) -> Observable:
    return h if isinstance(h, Observable) else Observable(h)


def energy(a: Ansatz, theta, h) -> float:
    obs = _as_observable(h)
    if obs.n_qubits != a.n_qubits:
        raise ValueError("ansatz and Hamiltonian sizes differ")
    return obs.value(a.prepare(theta))


def gradient(a: Ansatz, theta, h) -> np.ndarray:
    """Parameter-shift gradient: ``sum_occ w/2 [E(+pi/2) - E(-pi/2)]``."""
    obs = _as_observable(h)
    theta = a._check(theta)
    g = np.zeros(a.n_params)
    for j, s, k, w in a.occurrences():
        plus = obs.value(a.prepare(theta, (j, s, math.pi / 2)))
        minus = obs.value(a.prepare(theta, (j, s, -math.pi / 2)))
        g[k] += 0.5 * w * (plus - minus)
    return g


def gradient_adjoint(a: Ansatz, theta, h) -> tuple[float, np.ndarray]:
    """Energy and exact gradient by one forward and one backward sweep."""
    obs = _as_observable(h)
    theta = a._check(theta)
    psi = a.prepare(theta)
    lam = obs.apply(psi)
    e = float(np.vdot(psi, lam).real)
    g = np.zeros(a.n_params)
    for op in reversed(a.ops):
        t = None if op.param is None else theta[op.param]
        if op.param is not None:
            # d<H>/dtheta = 2 Re <lam| -i K |psi>
            g[op.param] += 2.0 * float(np.vdot(lam, -1j * op.generator(psi)).real)
        op.unapply(psi, t)
        op.unapply(lam, t)
    return e, g


def finite_difference_gradient(a: Ansatz, theta, h, step: float = 1e-5) -> np.ndarray:
    obs = _as_observable(h)
    theta = a._check(theta)
    g = np.zeros(a.n_params)
    for k in range(a.n_params):
        tp, tm = theta.copy(), theta.copy()
        tp[k] += step
        tm[k] -= step
        g[k] = (obs.value(a.prepare(tp)) - obs.value(a.prepare(tm))) / (2 * step)
    return g


# -- optimizers ------------------------------------------------------------


@dataclass(frozen=True)
class OptConfig:
    seed: int = 0
    max_iter: int = 500
    gtol: float = 1e-7
    ftol: float = 1e-13
    init_scale: float = 0.1
    method: str = "lbfgs"  # or "gd"
    gradient: str = "adjoint"  # or "shift"


@dataclass
class VQEResult:
    theta: np.ndarray
    energy: float
    trace: list[float]
    converged: bool
    n_iter: int


def _initial_theta(a: Ansatz, cfg: OptConfig, theta0) -> np.ndarray:
    if theta0 is not None:
        return a._check(theta0).copy()
    rng = np.random.default_rng(cfg.seed)
    return cfg.init_scale * rng.standard_normal(a.n_params)


def _value_and_grad(a: Ansatz, obs: Observable, cfg: OptConfig):
    if cfg.gradient == "shift":
        return lambda th: (obs.value(a.prepare(th)), gradient(a, th, obs))
    if cfg.gradient == "adjoint":
        return lambda th: gradient_adjoint(a, th, obs)
    raise ValueError(f"unknown gradient method {cfg.gradient!r}")


def _gradient_descent(fg, theta, cfg: OptConfig):
    e, g = fg(theta)
    trace = [e]
    step = 1.0
    for it in range(1, cfg.max_iter + 1):
        gn2 = float(g @ g)
        if math.sqrt(gn2) < cfg.gtol:
            return theta, e, trace, True, it
        # Armijo backtracking; c = 0.3 caps the step near 1.4 / curvature so
        # the doubling cannot settle into a symmetric overshoot
        step = min(step * 2.0, 1e3)
        while True:
            cand = theta - step * g
            ec, gc = fg(cand)
            if ec <= e - 0.3 * step * gn2 or step < 1e-14:
                break
            step *= 0.5
        done = e - ec < cfg.ftol * max(1.0, abs(e))
        if ec < e:
            theta, e, g = cand, ec, gc
        trace.append(min(trace[-1], e))
        if done:
            return theta, e, trace, True, it
    return theta, e, trace, False, cfg.max_iter


def _lbfgs(fg, theta, cfg: OptConfig):
    from scipy.optimize import minimize

    trace: list[float] = []
    best = [math.inf, theta.copy()]

    def fun(th):
        e, g = fg(th)
        if e < best[0]:
            best[0], best[1] = e, th.copy()
        trace.append(best[0])
        return e, g

    res = minimize(fun, theta, jac=True, method="L-BFGS-B",
                   options={"maxiter": cfg.max_iter, "gtol": cfg.gtol, "ftol": cfg.ftol, "maxcor": 30})
    return best[1], best[0], trace, bool(res.success), int(res.nit)


def minimize_observable(a: Ansatz, obs: Observable, cfg: OptConfig, theta0=None) -> VQEResult:
    theta = _initial_theta(a, cfg, theta0)
    fg = _value_and_grad(a, obs, cfg)
    if cfg.method == "gd":
        th, e, trace, ok, it = _gradient_descent(fg, theta, cfg)
    elif cfg.method == "lbfgs":
        th, e, trace, ok, it = _lbfgs(fg, theta, cfg)
    else:
        raise ValueError(f"unknown optimizer {cfg.method!r}")
    return VQEResult(np.asarray(th), float(e), trace, ok, it)


def vqe(a: Ansatz, h, cfg: OptConfig = OptConfig(), theta0=None) -> VQEResult:
    """Minimize ``<Phi(theta)|H|Phi(theta)>``; returns the best point found."""
    return minimize_observable(a, _as_observable(h), cfg, theta0)


@dataclass
class VQDLevel:
    theta: np.ndarray
    energy: float
    penalized: float
    overlaps: list[float]
    converged: bool


def default_beta(h: PauliSum) -> float:
    """``2 (E_max - E_min)`` estimated by twice the coefficient 1-norm."""
    return 2.0 * 2.0 * h.norm1(include_identity=False)


def vqd(a: Ansatz, h, k: int, beta: float | None = None, cfg: OptConfig = OptConfig(), restarts: int = 1) -> list[VQDLevel]:
    """Levels ``j = 0..k-1`` minimizing ``<H> + beta sum_{i<j} |<Phi|Phi_i>|^2``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    base = _as_observable(h)
    if beta is None:
        if not isinstance(h, PauliSum):
            raise ValueError("beta is required when h is not a PauliSum")
        beta = default_beta(h)
    levels: list[VQDLevel] = []
    states: list[np.ndarray] = []
    for j in range(k):
        obs = Observable(base.matrix, [(beta, s) for s in states])
        best = None
        for r in range(restarts):
            c = OptConfig(cfg.seed + 1000 * j + r, cfg.max_iter, cfg.gtol, cfg.ftol, cfg.init_scale, cfg.method, cfg.gradient)
            res = minimize_observable(a, obs, c)
            if best is None or res.energy < best.energy:
                best = res
        psi = a.prepare(best.theta)
        ov = [abs(np.vdot(s, psi)) ** 2 for s in states]
        levels.append(VQDLevel(best.theta, base.value(psi), best.energy, ov, best.converged))
        states.append(psi)
    return levels


# -- McLachlan dynamics ----------------------------------------------------


@dataclass
class McLachlanSystem:
    M: np.ndarray
    V: np.ndarray
    energy: float

    def solve(self, reg: float = 1e-8, max_reg: float = 1e-4) -> tuple[np.ndarray, float, float]:
        """Tikhonov solve of ``(M + reg I) x = V``, escalating ``reg`` x10 on failure."""
        n = self.M.shape[0]
        r = reg
        while True:
            A = self.M + r * np.eye(n)
            try:
                x = np.linalg.solve(A, self.V)
                if np.all(np.isfinite(x)) and np.linalg.norm(A @ x - self.V) <= 1e-10 * max(1.0, np.linalg.norm(self.V)):
                    return x, r, float(np.linalg.cond(A))
            except np.linalg.LinAlgError:
                pass
            r *= 10.0
            if r > max_reg * (1 + 1e-12):
                raise np.linalg.LinAlgError(
                    f"McLachlan system singular up to reg={max_reg:g} (cond={np.linalg.cond(self.M):.3e})")


def assemble_mclachlan(a: Ansatz, theta, h, imaginary: bool = False) -> McLachlanSystem:
    """``M = Re(<d_i|d_j> + <d_i|Phi><d_j|Phi>)``.

    Real time: ``V = Im(<d_i|H|Phi> - <d_i|Phi> E)``.
    Imaginary time: ``V = -Re(<d_i|H|Phi> - <d_i|Phi> E)``.
    """
    obs = _as_observable(h)
    psi, D = a.tangents(theta)
    hpsi = obs.apply(psi)
    e = float(np.vdot(psi, hpsi).real)
    ov = D.conj() @ psi  # <d_i|Phi>
    G = D.conj() @ D.T
    M = (G + np.outer(ov, ov)).real
    M = 0.5 * (M + M.T)
    w = D.conj() @ hpsi - ov * e
    V = -w.real if imaginary else w.imag
    return McLachlanSystem(M, V, e)


@dataclass
class Trajectory:
    times: list[float]
    thetas: list[np.ndarray]
    energies: list[float]
    fidelities: list[float | None]
    conditions: list[float]
    kind: str = "real"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "tau" if self.kind == "imaginary" else "time", "energy", "fidelity", "condition_number"])
        for i, (t, e, f, c) in enumerate(zip(self.times, self.energies, self.fidelities, self.conditions)):
            w.writerow([i, _fmt(t), _fmt(e), "" if f is None else _fmt(f), _fmt(c)])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _rk4(f, theta, dt):
    k1 = f(theta)
    k2 = f(theta + 0.5 * dt * k1)
    k3 = f(theta + 0.5 * dt * k2)
    k4 = f(theta + dt * k3)
    return theta + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def varqte(a: Ansatz, theta0, h, T: float, dt: float = 1e-3, reg: float = 1e-8,
           integrator: str = "rk4", oracle: bool = True, record_every: int = 1) -> Trajectory:
    """Real-time McLachlan evolution with per-step fidelity against exact dynamics."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    obs = _as_observable(h)
    theta = a._check(theta0).copy()
    n = max(1, int(round(T / dt)))
    dt = T / n
    prop = Propagator(h) if (oracle and isinstance(h, PauliSum)) else None
    psi0 = a.state(theta)
    cond = [math.nan]

    def rhs(th):
        sysm = assemble_mclachlan(a, th, obs)
        x, _, c = sysm.solve(reg)
        cond[0] = c
        return x

    def record(t, th):
        st = a.state(th)
        fid = prop.evolve(psi0, t).fidelity(st) if prop is not None else None
        traj.times.append(t)
        traj.thetas.append(th.copy())
        traj.energies.append(obs.value(st.amplitudes))
        traj.fidelities.append(fid)
        traj.conditions.append(cond[0])

    traj = Trajectory([], [], [], [], [], "real")
    rhs(theta)
    record(0.0, theta)
    for step in range(1, n + 1):
        theta = _rk4(rhs, theta, dt) if integrator == "rk4" else theta + dt * rhs(theta)
        if step % record_every == 0 or step == n:
            record(step * dt, theta)
    return traj


def varqite(a: Ansatz, theta0, h, beta_max: float, dtau: float = 1e-2, reg: float = 1e-8,
            integrator: str = "rk4", max_halvings: int = 20, energy_tol: float = 1e-8) -> Trajectory:
    """Imaginary-time McLachlan flow; steps that raise the energy are retried with half the step."""
    if dtau <= 0:
        raise ValueError("dtau must be positive")
    obs = _as_observable(h)
    theta = a._check(theta0).copy()
    cond = [math.nan]

    def rhs(th):
        sysm = assemble_mclachlan(a, th, obs, imaginary=True)
        x, _, c = sysm.solve(reg)
        cond[0] = c
        return x

    traj = Trajectory([], [], [], [], [], "imaginary")
    e = obs.value(a.prepare(theta))
    rhs(theta)
    tau = 0.0
    traj.times.append(tau)
    traj.thetas.append(theta.copy())
    traj.energies.append(e)
    traj.fidelities.append(None)
    traj.conditions.append(cond[0])
    h_step = dtau
    while tau < beta_max - 1e-12:
        step = min(h_step, beta_max - tau)
        for _ in range(max_halvings):
            cand = _rk4(rhs, theta, step) if integrator == "rk4" else theta + step * rhs(theta)
            ec = obs.value(a.prepare(cand))
            if ec <= e + energy_tol:
                break
            step *= 0.5
        else:
            break  # no descent possible at any step size
        # the accepted step size carries over, growing back towards dtau
        h_step = min(dtau, 1.5 * step) if step < h_step else h_step
        theta, tau, e = cand, tau + step, ec
        traj.times.append(tau)
        traj.thetas.append(theta.copy())
        traj.energies.append(ec)
        traj.fidelities.append(None)
        traj.conditions.append(cond[0])
    return traj
