"""Pauli strings and weighted Pauli sums in the symplectic bit-mask form.

A string on ``n`` qubits is stored as two integers ``x`` and ``z``; bit ``q``
of each mask describes qubit ``q`` (qubit 0 is the least significant bit of
a basis-state index and the rightmost character of a label). The operator
is ``phase * (sigma_{n-1} ⊗ ... ⊗ sigma_0)`` where ``sigma_q`` is I, X, Z or
Y according to ``(x_q, z_q)`` = (0,0), (1,0), (0,1), (1,1), and ``phase`` is
``1j ** k``. Internally ``sigma(x, z) = i^popcount(x & z) X^x Z^z``.

:class:`PauliSum` keeps its strings in numpy arrays (``uint64`` masks up to
64 qubits, Python ints beyond) and is treated as an immutable value.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from . import kernels

DEFAULT_TOL = 1e-12
DECOMPOSE_CAP = 10

_PHASES = (1.0 + 0j, 1j, -1.0 + 0j, -1j)
_LABEL_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LABEL = {v: k for k, v in _LABEL_BITS.items()}


class DimensionError(ValueError):
    """Operands act on registers of different size."""


class NonHermitianWarning(UserWarning):
    pass


def _popcount(a: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        return np.fromiter((int(v).bit_count() for v in a), dtype=np.int64, count=len(a))
    return np.bitwise_count(a).astype(np.int64)


def _mask_dtype(n_qubits: int):
    return np.uint64 if n_qubits <= 64 else object


@dataclass(frozen=True)
class PauliString:
    """A single Pauli string with a phase in {1, i, -1, -i}."""

    n_qubits: int
    x: int
    z: int
    phase: int = 0  # exponent k of i**k

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("mask exceeds register")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_label(cls, label: str, phase: int = 0) -> "PauliString":
        x = z = 0
        for q, ch in enumerate(reversed(label.upper())):
            bx, bz = _LABEL_BITS[ch]
            x |= bx << q
            z |= bz << q
        return cls(len(label), x, z, phase)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, kind: str) -> "PauliString":
        bx, bz = _LABEL_BITS[kind]
        return cls(n_qubits, bx << qubit, bz << qubit)

    @property
    def label(self) -> str:
        return "".join(
            _BITS_LABEL[((self.x >> q) & 1, (self.z >> q) & 1)]
            for q in reversed(range(self.n_qubits))
        )

    @property
    def coefficient(self) -> complex:
        return _PHASES[self.phase]

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def n_y(self) -> int:
        return (self.x & self.z).bit_count()

    @property
    def support(self) -> list[int]:
        m = self.x | self.z
        return [q for q in range(self.n_qubits) if (m >> q) & 1]

    def commutes(self, other: "PauliString") -> bool:
        _check_size(self.n_qubits, other.n_qubits)
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def adjoint(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x, self.z, -self.phase)

    def __matmul__(self, other: "PauliString") -> "PauliString":
        return mul(self, other)

    def to_dense(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        idx = np.arange(dim, dtype=np.uint64)
        cols = idx ^ np.uint64(self.x)
        signs = 1.0 - 2.0 * (np.bitwise_count(cols & np.uint64(self.z)) & 1)
        m = np.zeros((dim, dim), dtype=complex)
        m[idx.astype(np.int64), cols.astype(np.int64)] = signs * _PHASES[(self.phase + self.n_y) % 4]
        return m

    def __str__(self) -> str:
        sign = ("+", "+i", "-", "-i")[self.phase]
        return f"{sign}{self.label}"


def _check_size(a: int, b: int) -> None:
    if a != b:
        raise DimensionError(f"qubit-count mismatch: {a} vs {b}")


def mul(a: PauliString, b: PauliString) -> PauliString:
    """Exact product ``a @ b`` with phase tracking."""
    _check_size(a.n_qubits, b.n_qubits)
    x, z = a.x ^ b.x, a.z ^ b.z
    k = a.phase + b.phase + a.n_y + b.n_y + 2 * (a.z & b.x).bit_count() - (x & z).bit_count()
    return PauliString(a.n_qubits, x, z, k)


class PauliSum:
    """Weighted sum of label-form Pauli strings."""

    def __init__(self, n_qubits: int, xs=(), zs=(), coeffs=()):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        dt = _mask_dtype(n_qubits)
        self.n_qubits = int(n_qubits)
        self.xs = np.asarray(xs, dtype=dt).reshape(-1) if len(xs) else np.zeros(0, dtype=dt)
        self.zs = np.asarray(zs, dtype=dt).reshape(-1) if len(zs) else np.zeros(0, dtype=dt)
        self.coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
        if not (len(self.xs) == len(self.zs) == len(self.coeffs)):
            raise ValueError("mask and coefficient arrays differ in length")

    # -- construction -------------------------------------------------------
    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, [0], [0], [coeff])

    @classmethod
    def from_terms(cls, n_qubits: int, terms: Iterable[tuple[complex, PauliString | str]]) -> "PauliSum":
        xs, zs, cs = [], [], []
        for coeff, p in terms:
            if isinstance(p, str):
                p = PauliString.from_label(p)
            _check_size(n_qubits, p.n_qubits)
            xs.append(p.x)
            zs.append(p.z)
            cs.append(complex(coeff) * p.coefficient)
        return cls(n_qubits, xs, zs, cs)

    @classmethod
    def from_labels(cls, labels: dict[str, complex]) -> "PauliSum":
        n = len(next(iter(labels)))
        return cls.from_terms(n, [(c, lab) for lab, c in labels.items()])

    @classmethod
    def single(cls, n_qubits: int, qubit: int, kind: str, coeff: complex = 1.0) -> "PauliSum":
        return cls.from_terms(n_qubits, [(coeff, PauliString.single(n_qubits, qubit, kind))])

    # -- views ----------------------------------------------------------------
    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def n_terms(self) -> int:
        return len(self.coeffs)

    @property
    def terms(self) -> list[tuple[complex, PauliString]]:
        return [
            (complex(c), PauliString(self.n_qubits, int(x), int(z)))
            for x, z, c in zip(self.xs, self.zs, self.coeffs)
        ]

    def labels(self) -> dict[str, complex]:
        return {p.label: c for c, p in self.terms}

    @cached_property
    def n_y(self) -> np.ndarray:
        return _popcount(self.xs & self.zs)

    @cached_property
    def xz_coeffs(self) -> np.ndarray:
        """Coefficients of the ``X^x Z^z`` form (Y phases folded in)."""
        return self.coeffs * np.array(_PHASES)[self.n_y % 4]

    def __repr__(self) -> str:
        body = ", ".join(f"({c:.6g}) {p.label}" for c, p in self.terms[:8])
        more = "" if len(self) <= 8 else f", ... {len(self) - 8} more"
        return f"PauliSum(n={self.n_qubits}, [{body}{more}])"

    # -- algebra --------------------------------------------------------------
    def _like(self, xs, zs, coeffs) -> "PauliSum":
        return PauliSum(self.n_qubits, xs, zs, coeffs)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        _check_size(self.n_qubits, other.n_qubits)
        return self._like(
            np.concatenate([self.xs, other.xs]),
            np.concatenate([self.zs, other.zs]),
            np.concatenate([self.coeffs, other.coeffs]),
        ).simplify(0.0)

    def __neg__(self) -> "PauliSum":
        return self._like(self.xs, self.zs, -self.coeffs)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-other)

    def __mul__(self, scalar) -> "PauliSum":
        if isinstance(scalar, PauliSum):
            return NotImplemented
        return self._like(self.xs, self.zs, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "PauliSum":
        return self * (1.0 / scalar)

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        _check_size(self.n_qubits, other.n_qubits)
        if not len(self) or not len(other):
            return PauliSum.zero(self.n_qubits)
        xa, za, ya = self.xs[:, None], self.zs[:, None], self.n_y[:, None]
        xb, zb, yb = other.xs[None, :], other.zs[None, :], other.n_y[None, :]
        x = (xa ^ xb).ravel()
        z = (za ^ zb).ravel()
        overlap = _popcount((za & xb).ravel())
        k = (np.broadcast_to(ya + yb, (len(self), len(other))).ravel() + 2 * overlap - _popcount(x & z)) % 4
        c = (self.coeffs[:, None] * other.coeffs[None, :]).ravel() * np.array(_PHASES)[k]
        return self._like(x, z, c).simplify(0.0)

    def dagger(self) -> "PauliSum":
        return self._like(self.xs, self.zs, np.conj(self.coeffs))

    def commutator(self, other: "PauliSum") -> "PauliSum":
        return (self @ other - other @ self).simplify()

    def simplify(self, tol: float = DEFAULT_TOL) -> "PauliSum":
        """Merge duplicate strings (first-occurrence order) and drop |c| <= tol."""
        if not len(self):
            return self
        if self.xs.dtype == object:
            acc: dict[tuple[int, int], complex] = {}
            for x, z, c in zip(self.xs, self.zs, self.coeffs):
                key = (int(x), int(z))
                acc[key] = acc.get(key, 0.0) + c
            keys = list(acc)
            xs = [k[0] for k in keys]
            zs = [k[1] for k in keys]
            cs = np.array([acc[k] for k in keys], dtype=complex)
        else:
            key = np.stack([self.xs, self.zs], axis=1)
            uniq, first, inv = np.unique(key, axis=0, return_index=True, return_inverse=True)
            inv = inv.reshape(-1)
            summed = np.zeros(len(uniq), dtype=complex)
            np.add.at(summed, inv, self.coeffs)
            order = np.argsort(first, kind="stable")
            xs, zs, cs = uniq[order, 0], uniq[order, 1], summed[order]
        keep = np.abs(cs) > tol
        return self._like(np.asarray(xs, dtype=self.xs.dtype)[keep], np.asarray(zs, dtype=self.zs.dtype)[keep], cs[keep])

    def chop(self, tol: float = DEFAULT_TOL) -> "PauliSum":
        """Zero out real/imaginary parts below tol, then simplify."""
        c = self.coeffs.real * (np.abs(self.coeffs.real) > tol) + 1j * self.coeffs.imag * (np.abs(self.coeffs.imag) > tol)
        return self._like(self.xs, self.zs, c).simplify(tol)

    # -- predicates -----------------------------------------------------------
    def is_hermitian(self, tol: float = 1e-10) -> bool:
        s = self.simplify(0.0)
        return bool(np.all(np.abs(s.coeffs.imag) <= tol))

    def is_diagonal(self) -> bool:
        return bool(np.all(self.xs == 0))

    def allclose(self, other: "PauliSum", atol: float = 1e-10) -> bool:
        d = (self - other).simplify(atol)
        return len(d) == 0

    def norm1(self, include_identity: bool = True) -> float:
        c = np.abs(self.coeffs)
        if not include_identity:
            c = c[(self.xs != 0) | (self.zs != 0)]
        return float(np.sum(c))

    # -- register manipulation ------------------------------------------------
    def embed(self, n_total: int, offset: int) -> "PauliSum":
        """Place this operator on qubits ``offset .. offset + n_qubits - 1`` of a larger register."""
        if offset < 0 or offset + self.n_qubits > n_total:
            raise DimensionError("embedding exceeds target register")
        dt = _mask_dtype(n_total)
        xs = np.array([int(v) << offset for v in self.xs], dtype=dt)
        zs = np.array([int(v) << offset for v in self.zs], dtype=dt)
        return PauliSum(n_total, xs, zs, self.coeffs.copy())

    def relabel(self, qubit_map: Sequence[int], n_total: int) -> "PauliSum":
        """Send local qubit ``q`` to ``qubit_map[q]`` in a register of ``n_total`` qubits."""
        dt = _mask_dtype(n_total)

        def move(m: int) -> int:
            out = 0
            for q, target in enumerate(qubit_map):
                if (m >> q) & 1:
                    out |= 1 << target
            return out

        xs = np.array([move(int(v)) for v in self.xs], dtype=dt)
        zs = np.array([move(int(v)) for v in self.zs], dtype=dt)
        return PauliSum(n_total, xs, zs, self.coeffs.copy())

    # -- dense / sparse forms -------------------------------------------------
    def _require_small(self, cap: int) -> None:
        if self.n_qubits > cap:
            raise DimensionError(f"{self.n_qubits} qubits exceeds the matrix cap of {cap}")

    def to_sparse(self, cap: int = 26) -> sp.csr_matrix:
        self._require_small(cap)
        dim = 1 << self.n_qubits
        if not len(self):
            return sp.csr_matrix((dim, dim), dtype=complex)
        order = np.argsort(self.xs, kind="stable")
        rows, cols, data = kernels.pauli_sum_coo(
            self.n_qubits,
            np.ascontiguousarray(self.xs[order], dtype=np.uint64),
            np.ascontiguousarray(self.zs[order], dtype=np.uint64),
            np.ascontiguousarray(self.xz_coeffs[order]),
        )
        m = sp.coo_matrix((data, (rows, cols)), shape=(dim, dim)).tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        return m

    def to_dense(self, cap: int = 14) -> np.ndarray:
        self._require_small(cap)
        return self.to_sparse().toarray()

    def diagonal(self) -> np.ndarray:
        """Computational-basis diagonal of the Z-type part (exact for diagonal sums)."""
        self._require_small(26)
        dim = 1 << self.n_qubits
        idx = np.arange(dim, dtype=np.uint64)
        out = np.zeros(dim, dtype=complex)
        for x, z, c in zip(self.xs, self.zs, self.coeffs):
            if x == 0:
                out += c * (1.0 - 2.0 * (np.bitwise_count(idx & np.uint64(z)) & 1))
        return out

    # -- text format ----------------------------------------------------------
    def to_text(self, digits: int = 17) -> str:
        lines = [f"{c.real:.{digits}g} {c.imag:.{digits}g} {p.label}" for c, p in self.terms]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, n_qubits: int | None = None) -> "PauliSum":
        terms = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            re_s, im_s, label = line.split()
            terms.append((complex(float(re_s), float(im_s)), label))
        if not terms:
            if n_qubits is None:
                raise ValueError("empty Pauli text needs an explicit n_qubits")
            return cls.zero(n_qubits)
        n = len(terms[0][1])
        return cls.from_terms(n, terms)


def simplify(s: PauliSum, tol: float = DEFAULT_TOL) -> PauliSum:
    return s.simplify(tol)


def _walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Unnormalized WHT along the last axis (length a power of two)."""
    out = v.copy()
    n = out.shape[-1]
    lead = out.shape[:-1]
    h = 1
    while h < n:
        out = out.reshape(*lead, n // (2 * h), 2, h)
        a = out[..., 0, :].copy()
        b = out[..., 1, :]
        out[..., 0, :] = a + b
        out[..., 1, :] = a - b
        out = out.reshape(*lead, n)
        h *= 2
    return out


def decompose(m: np.ndarray, tol: float = DEFAULT_TOL, cap: int = DECOMPOSE_CAP, hermitian_tol: float | None = 1e-10) -> PauliSum:
    """Pauli expansion ``m = sum_P c_P P`` with ``c_P = tr(P m) / 2^k``.

    Pass ``hermitian_tol=None`` to skip the Hermiticity warning for operators
    that are non-Hermitian by construction.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError("matrix must be square")
    dim = m.shape[0]
    k = dim.bit_length() - 1
    if dim < 2 or (1 << k) != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    if k > cap:
        raise DimensionError(f"{k} qubits exceeds the decomposition cap of {cap}")
    if hermitian_tol is not None and np.max(np.abs(m - m.conj().T)) > hermitian_tol:
        warnings.warn("decomposing a non-Hermitian matrix", NonHermitianWarning, stacklevel=2)
    idx = np.arange(dim)
    # gathered[x, c] = m[c, c ^ x]
    gathered = m[idx[None, :], idx[None, :] ^ idx[:, None]]
    traces = _walsh_hadamard(gathered) / dim  # traces[x, z] = tr(X^x Z^z m) / dim
    xs, zs = np.nonzero(np.abs(traces) > tol)
    ny = np.bitwise_count((xs & zs).astype(np.uint64)).astype(np.int64)
    coeffs = traces[xs, zs] * np.array(_PHASES)[ny % 4]
    order = np.lexsort((zs, xs))
    return PauliSum(k, xs[order].astype(np.uint64), zs[order].astype(np.uint64), coeffs[order])


def anticommutation_matrix(s: PauliSum) -> np.ndarray:
    """Boolean matrix A[i, j] = strings i and j anticommute."""
    xi, zi = s.xs[:, None], s.zs[:, None]
    xj, zj = s.xs[None, :], s.zs[None, :]
    sym = (xi & zj) ^ (zi & xj)
    shape = sym.shape
    return (_popcount(sym.ravel()) % 2 == 1).reshape(shape)


def _spectral_norm(op: PauliSum, dense_cap: int = 12) -> float:
    op = op.simplify()
    if len(op) == 0:
        return 0.0
    if len(op) == 1:
        return float(abs(op.coeffs[0]))
    op._require_small(dense_cap)
    return float(np.linalg.norm(op.to_dense(), 2))


def alpha_commutator(h: PauliSum, groups: Sequence[PauliSum] | None = None) -> float:
    """Sum over ordered pairs of ``|| [H_j, [H_j, H_i]] ||`` (spectral norm).

    With ``groups=None`` the fragments ``H_i`` are the individual weighted
    strings of ``h``; then the nested commutator of two anticommuting strings
    is ``4 c_j^2 c_i P_i`` and vanishes otherwise.
    """
    if groups is None:
        s = h.simplify()
        if len(s) < 2:
            return 0.0
        anti = anticommutation_matrix(s)
        a = np.abs(s.coeffs)
        # anti[i, j] * 4 |c_j|^2 |c_i|
        return float(4.0 * np.sum(anti * (a[:, None] * (a[None, :] ** 2))))
    total = 0.0
    for hi in groups:
        for hj in groups:
            nested = hj.commutator(hj.commutator(hi))
            total += _spectral_norm(nested)
    return total


def product(ops: Iterable[PauliSum]) -> PauliSum:
    ops = list(ops)
    out = ops[0]
    for op in ops[1:]:
        out = out @ op
    return out


def total_of(ops: Iterable[PauliSum], n_qubits: int) -> PauliSum:
    """Sum of many PauliSums with a single merge."""
    ops = [o for o in ops if len(o)]
    if not ops:
        return PauliSum.zero(n_qubits)
    return PauliSum(
        n_qubits,
        np.concatenate([o.xs for o in ops]),
        np.concatenate([o.zs for o in ops]),
        np.concatenate([o.coeffs for o in ops]),
    ).simplify()


def log2_exact(dim: int) -> int:
    k = int(math.log2(dim))
    if 1 << k != dim:
        raise DimensionError(f"{dim} is not a power of two")
    return k
