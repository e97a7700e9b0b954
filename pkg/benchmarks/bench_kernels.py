"""Compiled vs numpy statevector kernels.

    python benchmarks/bench_kernels.py [--qubits 12 16 20] [--repeat 5]

Prints one row per (kernel, size) with the best-of-repeat wall time of each
backend and the speedup. Exits non-zero if the compiled extension is missing.
"""
from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from lgt_forge import _kernels_py

try:
    from lgt_forge import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def _state(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return a / np.linalg.norm(a)


def cases(n: int, rng: np.random.Generator):
    x = int(rng.integers(1, 1 << n))
    z = int(rng.integers(0, 1 << n))
    ny = bin(x & z).count("1")
    u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    xs = np.sort(rng.integers(0, 1 << n, size=64).astype(np.uint64))
    zs = rng.integers(0, 1 << n, size=64).astype(np.uint64)
    cs = rng.normal(size=64).astype(complex)
    coo_n = min(n, 14)
    return {
        "pauli_rotation": lambda m, a: m.pauli_rotation(a, x, z, ny, 0.3),
        "expval_xz": lambda m, a: m.expval_xz(a, x, z),
        "apply_1q": lambda m, a: m.apply_1q(a, n // 2, u[0, 0], u[0, 1], u[1, 0], u[1, 1]),
        "apply_cnot": lambda m, a: m.apply_cnot(a, 0, n - 1),
        f"pauli_sum_coo[{coo_n}q,64 terms]": lambda m, a: m.pauli_sum_coo(coo_n, xs % (1 << coo_n), zs % (1 << coo_n), cs),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[12, 16, 20])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels not available; build with pip install -e .", file=sys.stderr)
        return 1
    rng = np.random.default_rng(7)
    print(f"{'kernel':<32}{'n':>4}{'cython [ms]':>14}{'numpy [ms]':>14}{'speedup':>10}")
    for n in args.qubits:
        base = _state(n, rng)
        for name, fn in cases(n, rng).items():
            times = {}
            for label, mod in (("cython", _kernels), ("numpy", _kernels_py)):
                a = base.copy()
                number = 3
                t = min(timeit.repeat(lambda: fn(mod, a), number=number, repeat=args.repeat)) / number
                times[label] = t * 1e3
            print(f"{name:<32}{n:>4}{times['cython']:>14.3f}{times['numpy']:>14.3f}"
                  f"{times['numpy'] / times['cython']:>10.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
