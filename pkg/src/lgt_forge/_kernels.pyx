# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled statevector kernels.

Every routine mirrors a function of the same name in ``_kernels_py``; the
differential tests in ``tests/test_kernels.py`` hold the two together.

A Pauli string is passed as two bit masks ``x`` and ``z`` and stands for the
operator ``X^x Z^z`` (qubit 0 is the least significant bit), so that
``X^x Z^z |j> = (-1)^popcount(j & z) |j ^ x>``.
"""
import numpy as np
cimport numpy as cnp

from libc.math cimport cos, sin

ctypedef unsigned long long u64
ctypedef double complex c128

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

cnp.import_array()


cdef inline double _sign(u64 j, u64 z) noexcept nogil:
    return -1.0 if (__builtin_popcountll(j & z) & 1) else 1.0


def pauli_rotation(c128[::1] psi, u64 x, u64 z, int ny, double angle):
    """In place: psi <- exp(-i angle/2 P) psi with P = i^ny X^x Z^z Hermitian."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef double c = cos(0.5 * angle)
    cdef double s = sin(0.5 * angle)
    cdef c128 ph = (1.0, 1j, -1.0, -1j)[ny & 3]
    # -i * sin * i^ny
    cdef c128 f = -1j * s * ph
    cdef u64 j, k
    cdef c128 a, b
    with nogil:
        if x == 0:
            for j in range(<u64>dim):
                psi[j] = psi[j] * (c + f * _sign(j, z))
        else:
            for j in range(<u64>dim):
                k = j ^ x
                if k < j:
                    continue
                a = psi[j]
                b = psi[k]
                psi[j] = c * a + f * _sign(k, z) * b
                psi[k] = c * b + f * _sign(j, z) * a


def apply_pauli(c128[::1] psi, c128[::1] out, u64 x, u64 z, c128 coeff):
    """out += coeff * X^x Z^z psi."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef u64 i, k
    with nogil:
        for i in range(<u64>dim):
            k = i ^ x
            out[i] = out[i] + coeff * _sign(k, z) * psi[k]


def expval_xz(c128[::1] psi, u64 x, u64 z):
    """<psi| X^x Z^z |psi>."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef u64 i, k
    cdef c128 acc = 0.0
    with nogil:
        for i in range(<u64>dim):
            k = i ^ x
            acc = acc + psi[i].conjugate() * _sign(k, z) * psi[k]
    return complex(acc)


def apply_1q(c128[::1] psi, int q, c128 u00, c128 u01, c128 u10, c128 u11):
    """In place single-qubit unitary on qubit q."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef u64 bit = (<u64>1) << q
    cdef u64 j, k
    cdef c128 a, b
    with nogil:
        for j in range(<u64>dim):
            if j & bit:
                continue
            k = j | bit
            a = psi[j]
            b = psi[k]
            psi[j] = u00 * a + u01 * b
            psi[k] = u10 * a + u11 * b


def apply_cnot(c128[::1] psi, int control, int target):
    """In place CNOT."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef u64 cb = (<u64>1) << control
    cdef u64 tb = (<u64>1) << target
    cdef u64 j, k
    cdef c128 a
    with nogil:
        for j in range(<u64>dim):
            if (j & cb) and not (j & tb):
                k = j | tb
                a = psi[j]
                psi[j] = psi[k]
                psi[k] = a


def pauli_sum_coo(int n_qubits, cnp.uint64_t[::1] xs, cnp.uint64_t[::1] zs, c128[::1] coeffs):
    """COO triplets of sum_t coeffs[t] X^xs[t] Z^zs[t].

    ``xs`` must be sorted; terms sharing an x mask are merged into a single
    entry per row, so the output has one block of ``2^n`` entries per
    distinct x mask.
    """
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n_qubits
    cdef Py_ssize_t nt = xs.shape[0]
    cdef Py_ssize_t ng = 0, t
    for t in range(nt):
        if t == 0 or xs[t] != xs[t - 1]:
            ng += 1
    rows_a = np.empty(ng * dim, dtype=np.int64)
    cols_a = np.empty(ng * dim, dtype=np.int64)
    data_a = np.zeros(ng * dim, dtype=np.complex128)
    cdef cnp.int64_t[::1] rows = rows_a
    cdef cnp.int64_t[::1] cols = cols_a
    cdef c128[::1] data = data_a
    cdef Py_ssize_t base = -dim
    cdef u64 i, k, x, z
    cdef c128 c
    with nogil:
        for t in range(nt):
            x = xs[t]
            z = zs[t]
            c = coeffs[t]
            if t == 0 or x != xs[t - 1]:
                base += dim
                for i in range(<u64>dim):
                    rows[base + i] = <cnp.int64_t>i
                    cols[base + i] = <cnp.int64_t>(i ^ x)
            for i in range(<u64>dim):
                k = i ^ x
                data[base + i] += c * _sign(k, z)
    return rows_a, cols_a, data_a
