"""Gate-level circuit IR with exact CNOT accounting.

Gates are CNOT, SWAP, single-qubit Cliffords/rotations and a composite
``PAULIROT`` (``exp(-i angle P / 2)`` for a Pauli string ``P``). Composites
are kept compact for fast simulation; :meth:`Circuit.expand` lowers them into
basis changes plus a CNOT ladder and SWAPs into three CNOTs. Gate counts are
always taken on the expanded form.

Rotation convention: ``RX(a) = exp(-i a X / 2)`` and likewise for Y, Z.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .pauli import PauliString

ONE_QUBIT = {"H", "S", "SDG", "X", "Y", "Z", "RX", "RY", "RZ"}
TWO_QUBIT = {"CNOT", "SWAP"}
ROTATIONS = {"RX", "RY", "RZ"}


class Gate(NamedTuple):
    name: str
    qubits: tuple[int, ...]
    angle: float | None = None
    # PAULIROT only
    x: int = 0
    z: int = 0

    def __str__(self) -> str:
        parts = [self.name, *map(str, self.qubits)]
        if self.name == "PAULIROT":
            parts.append(f"x={self.x:#x}")
            parts.append(f"z={self.z:#x}")
        if self.angle is not None:
            parts.append(repr(float(self.angle)))
        return " ".join(parts)


@dataclass(frozen=True)
class GateCounts:
    cnot_count: int
    cnot_depth: int
    total_gates: int
    single_qubit: int = 0

    def to_dict(self) -> dict:
        return {
            "cnot_count": self.cnot_count,
            "cnot_depth": self.cnot_depth,
            "total_gates": self.total_gates,
            "single_qubit": self.single_qubit,
        }


_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_FIXED = {
    "H": _H,
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0 + 0j, -1.0]),
}


def one_qubit_matrix(name: str, angle: float | None = None) -> np.ndarray:
    if name in _FIXED:
        return _FIXED[name]
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if name == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if name == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if name == "RZ":
        return np.diag([cmath.exp(-0.5j * angle), cmath.exp(0.5j * angle)])
    raise ValueError(f"unknown single-qubit gate {name!r}")


def zyz_angles(u: np.ndarray) -> tuple[float, float, float, float]:
    """``u = e^{i phase} RZ(a) RY(b) RZ(c)``; returns ``(a, b, c, phase)``."""
    det = np.linalg.det(u)
    phase = cmath.phase(det) / 2
    v = u * cmath.exp(-1j * phase)  # special unitary
    b = 2 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    # v00 = e^{-i(a+c)/2} cos, v10 = e^{i(a-c)/2} sin
    sum_ac = -2 * cmath.phase(v[0, 0]) if abs(v[0, 0]) > 1e-14 else 0.0
    diff_ac = 2 * cmath.phase(v[1, 0]) if abs(v[1, 0]) > 1e-14 else 0.0
    a = (sum_ac + diff_ac) / 2
    c = (sum_ac - diff_ac) / 2
    # the half-angle representation is only fixed up to a sign; repair it
    test = one_qubit_matrix("RZ", a) @ one_qubit_matrix("RY", b) @ one_qubit_matrix("RZ", c)
    k = np.argmax(np.abs(test))
    ratio = v.flat[k] / test.flat[k]
    phase += cmath.phase(ratio)
    return a, b, c, phase


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    global_phase: float = 0.0
    # logical qubit held by each physical wire at the end (SWAP networks)
    output_permutation: tuple[int, ...] | None = None

    def _check(self, *qubits: int) -> None:
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"qubit {q} out of range for {self.n_qubits} qubits")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated qubit in {qubits}")

    def add(self, name: str, *qubits: int, angle: float | None = None) -> "Circuit":
        name = name.upper()
        if name in ONE_QUBIT:
            if len(qubits) != 1:
                raise ValueError(f"{name} acts on one qubit")
        elif name in TWO_QUBIT:
            if len(qubits) != 2:
                raise ValueError(f"{name} acts on two qubits")
        else:
            raise ValueError(f"unknown gate {name!r}")
        if name in ROTATIONS:
            if angle is None or not math.isfinite(angle):
                raise ValueError(f"{name} needs a finite angle")
        self._check(*qubits)
        self.gates.append(Gate(name, tuple(qubits), None if angle is None else float(angle)))
        return self

    def pauli_rotation(self, p: PauliString, angle: float) -> "Circuit":
        """Append ``exp(-i angle P / 2)``; identity strings only shift the global phase."""
        if p.n_qubits != self.n_qubits:
            raise ValueError("Pauli string size does not match the circuit")
        if not math.isfinite(angle):
            raise ValueError("angle must be finite")
        if p.phase % 2:
            raise ValueError("rotation generator must be Hermitian (phase +-1)")
        if p.phase == 2:
            angle = -angle
        if p.weight == 0:
            self.global_phase -= angle / 2
            return self
        self.gates.append(Gate("PAULIROT", tuple(p.support), float(angle), p.x, p.z))
        return self

    def unitary_1q(self, q: int, u: np.ndarray) -> "Circuit":
        """Append an arbitrary single-qubit unitary as RZ RY RZ."""
        a, b, c, phase = zyz_angles(u)
        self.add("RZ", q, angle=c).add("RY", q, angle=b).add("RZ", q, angle=a)
        self.global_phase += phase
        return self

    def extend(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("circuit sizes differ")
        self.gates.extend(other.gates)
        self.global_phase += other.global_phase
        return self

    def inverse(self) -> "Circuit":
        out = Circuit(self.n_qubits, global_phase=-self.global_phase)
        inv = {"S": "SDG", "SDG": "S"}
        for g in reversed(self.gates):
            if g.angle is not None:
                out.gates.append(Gate(g.name, g.qubits, -g.angle, g.x, g.z))
            else:
                out.gates.append(Gate(inv.get(g.name, g.name), g.qubits))
        return out

    def __len__(self) -> int:
        return len(self.gates)

    def expand(self) -> "Circuit":
        """Lower PAULIROT and SWAP into the CNOT + single-qubit basis."""
        out = Circuit(self.n_qubits, global_phase=self.global_phase, output_permutation=self.output_permutation)
        append = out.gates.append
        for g in self.gates:
            if g.name == "SWAP":
                a, b = g.qubits
                append(Gate("CNOT", (a, b)))
                append(Gate("CNOT", (b, a)))
                append(Gate("CNOT", (a, b)))
            elif g.name == "PAULIROT":
                for gg in _ladder(g):
                    append(gg)
            else:
                append(g)
        return out

    def counts(self) -> GateCounts:
        flat = self.gates
        level = [0] * self.n_qubits
        cnots = 0
        for g in flat:
            name = g.name
            if name == "CNOT":
                a, b = g.qubits
                la, lb = level[a], level[b]
                level[a] = level[b] = (la if la > lb else lb) + 1
                cnots += 1
            elif name == "SWAP" or name == "PAULIROT":
                return self.expand().counts()
        depth = max(level, default=0)
        return GateCounts(cnots, depth, len(flat), len(flat) - cnots)

    def to_text(self, expand: bool = True) -> str:
        src = self.expand() if expand else self
        lines = [f"# n_qubits {self.n_qubits}", f"# global_phase {self.global_phase!r}"]
        lines += [str(g) for g in src.gates]
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        c = self.counts()
        return {"n_qubits": self.n_qubits, "cnot_count": c.cnot_count, "cnot_depth": c.cnot_depth}

    def summary_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


def _ladder(g: Gate) -> Iterable[Gate]:
    """Basis change, CNOT ladder onto the highest support qubit, RZ, and undo."""
    support = list(g.qubits)
    pre: list[Gate] = []
    for q in support:
        bx, bz = (g.x >> q) & 1, (g.z >> q) & 1
        if bx and bz:  # Y -> Z via S^dag then H
            pre.append(Gate("SDG", (q,)))
            pre.append(Gate("H", (q,)))
        elif bx:
            pre.append(Gate("H", (q,)))
    chain = [Gate("CNOT", (a, b)) for a, b in zip(support, support[1:])]
    post = []
    for gate in reversed(pre):
        post.append(Gate({"SDG": "S"}.get(gate.name, gate.name), gate.qubits))
    return [*pre, *chain, Gate("RZ", (support[-1],), g.angle), *reversed(chain), *post]


def pauli_rotation(p: PauliString, angle: float) -> Circuit:
    """Stand-alone circuit for ``exp(-i angle P / 2)``, already lowered."""
    c = Circuit(p.n_qubits)
    c.pauli_rotation(p, angle)
    return c.expand()


def parse_text(text: str) -> Circuit:
    """Inverse of :meth:`Circuit.to_text` (expanded form)."""
    n, phase, gates = None, 0.0, []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(" ")
            if key == "n_qubits":
                n = int(val)
            elif key == "global_phase":
                phase = float(val)
            continue
        parts = line.split()
        name = parts[0]
        if name in ROTATIONS:
            gates.append(Gate(name, (int(parts[1]),), float(parts[2])))
        else:
            gates.append(Gate(name, tuple(int(q) for q in parts[1:])))
    if n is None:
        raise ValueError("missing n_qubits header")
    return Circuit(n, gates, phase)
