"""Statevector execution and exact reference solvers.

Amplitude index bit ``q`` is qubit ``q`` (qubit 0 least significant).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from . import kernels
from .circuit import Circuit, one_qubit_matrix
from .pauli import PauliSum

DEFAULT_CAP = 26
DENSE_CAP = 12
# above this many qubits the exact solvers switch from dense to sparse methods
DENSE_SWITCH = 10
NORM_TOL = 1e-10


class CapacityError(ValueError):
    pass


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(f"expected {1 << self.n_qubits} amplitudes, got {self.amplitudes.shape}")

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        return cls.basis(n_qubits, 0)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        a = np.zeros(1 << n_qubits, dtype=np.complex128)
        a[index] = 1.0
        return cls(n_qubits, a)

    @classmethod
    def from_array(cls, amplitudes, normalize: bool = False) -> "StateVector":
        a = np.asarray(amplitudes, dtype=np.complex128)
        n = a.shape[0].bit_length() - 1
        if 1 << n != a.shape[0]:
            raise ValueError("length must be a power of two")
        if normalize:
            a = a / np.linalg.norm(a)
        return cls(n, a)

    @classmethod
    def random(cls, n_qubits: int, rng: np.random.Generator) -> "StateVector":
        a = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
        return cls(n_qubits, a / np.linalg.norm(a))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        return abs(self.overlap(other)) ** 2

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def save(self, path: str | Path) -> tuple[Path, Path]:
        """Write ``<path>.bin`` (little-endian complex128) and ``<path>.json`` header."""
        path = Path(path)
        bin_path, head_path = path.with_suffix(".bin"), path.with_suffix(".json")
        self.amplitudes.astype("<c16").tofile(bin_path)
        head_path.write_text(json.dumps({"n_qubits": self.n_qubits, "ordering": "qubit0-LSB",
                                         "dtype": "complex128", "endianness": "little"}, indent=2))
        return bin_path, head_path

    @classmethod
    def load(cls, path: str | Path) -> "StateVector":
        path = Path(path)
        head = json.loads(path.with_suffix(".json").read_text())
        a = np.fromfile(path.with_suffix(".bin"), dtype="<c16")
        return cls(int(head["n_qubits"]), a)


def _apply_gate(a: np.ndarray, g, fused: bool) -> None:
    name = g.name
    if name == "CNOT":
        kernels.apply_cnot(a, g.qubits[0], g.qubits[1])
    elif name == "SWAP":
        p, q = g.qubits
        kernels.apply_cnot(a, p, q)
        kernels.apply_cnot(a, q, p)
        kernels.apply_cnot(a, p, q)
    elif name == "PAULIROT":
        if fused:
            kernels.pauli_rotation(a, g.x, g.z, (g.x & g.z).bit_count(), g.angle)
        else:
            for sub in Circuit(a.shape[0].bit_length() - 1, [g]).expand().gates:
                _apply_gate(a, sub, fused)
    else:
        u = one_qubit_matrix(name, g.angle)
        kernels.apply_1q(a, g.qubits[0], u[0, 0], u[0, 1], u[1, 0], u[1, 1])


def apply(c: Circuit, psi: StateVector, fused: bool = True, cap: int = DEFAULT_CAP) -> StateVector:
    """Run ``c`` on a copy of ``psi``. ``fused`` applies PAULIROT in one pass."""
    if c.n_qubits != psi.n_qubits:
        raise ValueError(f"circuit has {c.n_qubits} qubits, state has {psi.n_qubits}")
    if psi.n_qubits > cap:
        raise CapacityError(f"{psi.n_qubits} qubits exceeds the statevector cap of {cap}")
    a = psi.amplitudes.copy()
    for g in c.gates:
        _apply_gate(a, g, fused)
    if c.global_phase:
        a *= np.exp(1j * c.global_phase)
    return StateVector(psi.n_qubits, a)


def circuit_unitary(c: Circuit, fused: bool = True, cap: int = DENSE_CAP) -> np.ndarray:
    if c.n_qubits > cap:
        raise CapacityError(f"{c.n_qubits} qubits exceeds the dense cap of {cap}")
    dim = 1 << c.n_qubits
    cols = [apply(c, StateVector.basis(c.n_qubits, j), fused).amplitudes for j in range(dim)]
    return np.stack(cols, axis=1)


def permute_qubits(psi: StateVector, perm) -> StateVector:
    """Move the content of wire ``w`` to qubit ``perm[w]``."""
    n = psi.n_qubits
    t = psi.amplitudes.reshape([2] * n)
    # tensor axis k holds qubit n-1-k
    src = [n - 1 - w for w in range(n)]
    dst = [n - 1 - perm[w] for w in range(n)]
    out = np.moveaxis(t, src, dst)
    return StateVector(n, np.ascontiguousarray(out).reshape(-1))


def _require_hermitian(h: PauliSum) -> None:
    if not h.is_hermitian():
        raise ValueError("observable must be Hermitian")


def expectation(h: PauliSum, psi: StateVector) -> float:
    """``<psi|H|psi>`` summed term by term in fixed order (pairwise reduction)."""
    _require_hermitian(h)
    if h.n_qubits != psi.n_qubits:
        raise ValueError("operator and state sizes differ")
    a = psi.amplitudes
    coeffs = h.xz_coeffs
    vals = np.array([kernels.expval_xz(a, int(x), int(z)) for x, z in zip(h.xs, h.zs)], dtype=complex)
    total = np.sum(coeffs * vals)
    return float(total.real)


def apply_operator(h: PauliSum, psi: StateVector) -> np.ndarray:
    """Unnormalized ``H|psi>``."""
    out = np.zeros_like(psi.amplitudes)
    for x, z, c in zip(h.xs, h.zs, h.xz_coeffs):
        kernels.apply_pauli(psi.amplitudes, out, int(x), int(z), complex(c))
    return out


class Propagator:
    """``exp(-i H t)`` with a cached factorization.

    Small registers diagonalize the dense matrix once; larger ones use Krylov
    ``expm_multiply`` on the sparse matrix.
    """

    def __init__(self, h: PauliSum, cap: int = DENSE_CAP):
        _require_hermitian(h)
        if h.n_qubits > cap:
            raise CapacityError(f"{h.n_qubits} qubits exceeds the dense cap of {cap}")
        self.n_qubits = h.n_qubits
        if h.n_qubits <= DENSE_SWITCH:
            m = h.to_dense()
            self.evals, self.evecs = sla.eigh(m)
            self.sparse = None
        else:
            self.sparse = h.to_sparse().tocsr()
            self.evals = self.evecs = None

    def evolve(self, psi: StateVector, t: float) -> StateVector:
        if t == 0:
            return psi.copy()
        if self.sparse is None:
            c = self.evecs.conj().T @ psi.amplitudes
            return StateVector(psi.n_qubits, self.evecs @ (np.exp(-1j * self.evals * t) * c))
        a = spla.expm_multiply(-1j * t * self.sparse, psi.amplitudes)
        return StateVector(psi.n_qubits, a)

    def unitary(self, t: float) -> np.ndarray:
        if self.sparse is not None:
            raise CapacityError("dense unitary requested for a sparse propagator")
        return (self.evecs * np.exp(-1j * self.evals * t)) @ self.evecs.conj().T


def exact_evolve(h: PauliSum, T: float, psi: StateVector, cap: int = DENSE_CAP) -> StateVector:
    return Propagator(h, cap).evolve(psi, T)


def exact_unitary(h: PauliSum, T: float, cap: int = DENSE_SWITCH) -> np.ndarray:
    _require_hermitian(h)
    if h.n_qubits > cap:
        raise CapacityError(f"{h.n_qubits} qubits exceeds the dense cap of {cap}")
    return sla.expm(-1j * T * h.to_dense())


def _eig(m, k: int, dense: bool) -> tuple[np.ndarray, np.ndarray]:
    if dense:
        w, v = sla.eigh(m.toarray() if hasattr(m, "toarray") else m)
        return w[:k], v[:, :k]
    dim = m.shape[0]
    if m.nnz == m.diagonal().nonzero()[0].size:
        # Lanczos breaks down on diagonal operators with few distinct levels
        d = m.diagonal().real
        order = np.argsort(d, kind="stable")[:k]
        v = np.zeros((dim, k), dtype=complex)
        v[order, np.arange(k)] = 1.0
        return d[order], v
    v0 = np.ones(dim) / np.sqrt(dim)
    w, v = spla.eigsh(m, k=k, which="SA", v0=v0, tol=1e-13, ncv=max(2 * k + 1, 40))
    order = np.argsort(w)
    return w[order], v[:, order]


def exact_eigensystem(h: PauliSum, k: int = 1, cap: int = DENSE_CAP, basis: np.ndarray | None = None):
    """``k`` lowest eigenpairs ascending.

    With ``basis`` (sorted basis indices spanning an invariant subspace, such
    as a Gauss-law sector) the problem is solved inside that subspace and the
    eigenvectors are embedded back into the full register.
    """
    _require_hermitian(h)
    if h.n_qubits > cap:
        raise CapacityError(f"{h.n_qubits} qubits exceeds the dense cap of {cap}")
    full = h.to_sparse().tocsr()
    m = full if basis is None else full[basis][:, basis]
    dim = m.shape[0]
    if k > dim:
        raise ValueError(f"requested {k} eigenpairs of a {dim}-dimensional problem")
    dense = dim <= (1 << DENSE_SWITCH) or k >= dim - 1
    w, v = _eig(m, k, dense)
    out = []
    for j in range(k):
        vec = np.zeros(1 << h.n_qubits, dtype=complex)
        if basis is None:
            vec[:] = v[:, j]
        else:
            vec[basis] = v[:, j]
        # fix the sign so runs agree bit for bit
        piv = np.argmax(np.abs(vec) > 1e-8)
        vec *= np.exp(-1j * np.angle(vec[piv]))
        vec /= np.linalg.norm(vec)
        res = np.linalg.norm(full @ vec - w[j] * vec)
        if res > 1e-9:
            raise RuntimeError(f"eigenpair {j} residual {res:.2e} above 1e-9")
        out.append((float(w[j]), StateVector(h.n_qubits, vec)))
    return out
