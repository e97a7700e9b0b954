"""Numpy implementations of the statevector kernels.

Same signatures and semantics as the compiled ``_kernels`` module.
"""
from __future__ import annotations

import numpy as np

_PHASES = (1.0, 1j, -1.0, -1j)


def _signs(idx: np.ndarray, z: int) -> np.ndarray:
    return 1.0 - 2.0 * (np.bitwise_count(idx & np.uint64(z)) & 1)


def _index(dim: int) -> np.ndarray:
    return np.arange(dim, dtype=np.uint64)


def pauli_rotation(psi: np.ndarray, x: int, z: int, ny: int, angle: float) -> None:
    idx = _index(psi.shape[0])
    c, s = np.cos(0.5 * angle), np.sin(0.5 * angle)
    f = -1j * s * _PHASES[ny & 3]
    if x == 0:
        psi *= c + f * _signs(idx, z)
        return
    k = idx ^ np.uint64(x)
    flipped = psi[k]
    psi *= c
    psi += f * _signs(k, z) * flipped


def apply_pauli(psi: np.ndarray, out: np.ndarray, x: int, z: int, coeff: complex) -> None:
    idx = _index(psi.shape[0])
    k = idx ^ np.uint64(x)
    out += coeff * _signs(k, z) * psi[k]


def expval_xz(psi: np.ndarray, x: int, z: int) -> complex:
    idx = _index(psi.shape[0])
    k = idx ^ np.uint64(x)
    return complex(np.vdot(psi, _signs(k, z) * psi[k]))


def apply_1q(psi: np.ndarray, q: int, u00, u01, u10, u11) -> None:
    dim = psi.shape[0]
    view = psi.reshape(dim >> (q + 1), 2, 1 << q)
    a = view[:, 0, :].copy()
    b = view[:, 1, :]
    view[:, 0, :] = u00 * a + u01 * b
    view[:, 1, :] = u10 * a + u11 * b


def apply_cnot(psi: np.ndarray, control: int, target: int) -> None:
    idx = _index(psi.shape[0])
    cb, tb = np.uint64(1 << control), np.uint64(1 << target)
    src = idx[((idx & cb) != 0) & ((idx & tb) == 0)]
    dst = src | tb
    psi[src], psi[dst] = psi[dst], psi[src].copy()


def pauli_sum_coo(n_qubits: int, xs: np.ndarray, zs: np.ndarray, coeffs: np.ndarray):
    dim = 1 << n_qubits
    idx = _index(dim)
    groups = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    bounds = np.r_[groups, len(xs)]
    rows, cols, data = [], [], []
    for a, b in zip(bounds[:-1], bounds[1:]):
        k = idx ^ xs[a]
        vals = np.zeros(dim, dtype=complex)
        for lo in range(a, b, 64):
            hi = min(b, lo + 64)
            signs = 1.0 - 2.0 * (np.bitwise_count(k[None, :] & zs[lo:hi, None]) & 1)
            vals += coeffs[lo:hi] @ signs
        rows.append(idx.astype(np.int64))
        cols.append(k.astype(np.int64))
        data.append(vals)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(data)
