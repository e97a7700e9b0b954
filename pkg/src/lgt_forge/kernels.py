"""Backend selection for the statevector kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation. Set ``LGT_FORGE_PURE=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("LGT_FORGE_PURE"):
    _impl = _kernels_py
    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "numpy"

pauli_rotation = _impl.pauli_rotation
apply_pauli = _impl.apply_pauli
expval_xz = _impl.expval_xz
apply_1q = _impl.apply_1q
apply_cnot = _impl.apply_cnot
pauli_sum_coo = _impl.pauli_sum_coo

__all__ = [
    "BACKEND",
    "pauli_rotation",
    "apply_pauli",
    "expval_xz",
    "apply_1q",
    "apply_cnot",
    "pauli_sum_coo",
]
