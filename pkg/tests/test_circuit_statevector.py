import numpy as np
import pytest
from scipy.linalg import expm

from lgt_forge import kernels
from lgt_forge.circuit import Circuit, one_qubit_matrix, parse_text, pauli_rotation
from lgt_forge.pauli import PauliString, PauliSum
from lgt_forge.statevector import (
    CapacityError,
    StateVector,
    apply,
    circuit_unitary,
    exact_eigensystem,
    exact_evolve,
    expectation,
    permute_qubits,
)


def dense_gate(n, name, qubits, angle=None):
    dim = 1 << n
    if name == "CNOT":
        c, t = qubits
        m = np.zeros((dim, dim))
        for i in range(dim):
            j = i ^ (1 << t) if (i >> c) & 1 else i
            m[j, i] = 1
        return m
    u = one_qubit_matrix(name, angle)
    out = np.array([[1.0]])
    for q in reversed(range(n)):
        out = np.kron(out, u if q == qubits[0] else np.eye(2))
    return out


def random_circuit(n, depth, rng):
    c = Circuit(n)
    for _ in range(depth):
        if rng.random() < 0.3:
            a, b = rng.choice(n, 2, replace=False)
            c.add("CNOT", int(a), int(b))
        else:
            name = str(rng.choice(["H", "S", "X", "RX", "RY", "RZ"]))
            angle = float(rng.uniform(-np.pi, np.pi)) if name.startswith("R") else None
            c.add(name, int(rng.integers(n)), angle=angle)
    return c


def test_x_flips():
    out = apply(Circuit(1).add("X", 0), StateVector.zero(1))
    np.testing.assert_allclose(out.amplitudes, [0, 1])


def test_hh_is_identity():
    out = apply(Circuit(1).add("H", 0).add("H", 0), StateVector.zero(1))
    assert abs(out.amplitudes[0] - 1) < 1e-12


def test_random_circuit_matches_dense(rng):
    n = 8
    c = random_circuit(n, 60, rng)
    psi = StateVector.random(n, rng)
    u = np.eye(1 << n)
    for g in c.gates:
        u = dense_gate(n, g.name, g.qubits, g.angle) @ u
    np.testing.assert_allclose(apply(c, psi).amplitudes, u @ psi.amplitudes, atol=1e-10)


@pytest.mark.parametrize("label", ["Z", "XZ", "YXZ", "IZIY", "XYZX"])
def test_pauli_rotation_matches_exponential(label):
    p = PauliString.from_label(label)
    circ = pauli_rotation(p, 0.731)
    oracle = expm(-0.5j * 0.731 * p.to_dense())
    np.testing.assert_allclose(circuit_unitary(circ), oracle, atol=1e-12)
    assert circ.counts().cnot_count == 2 * (p.weight - 1)


def test_weight_one_z_is_single_rz():
    circ = pauli_rotation(PauliString.from_label("Z"), 0.4)
    assert [g.name for g in circ.gates] == ["RZ"] and circ.counts().cnot_count == 0


def test_random_weight_two_strings(rng):
    for _ in range(10):
        lab = "".join(rng.choice(list("XYZ"), 2)) + "I"
        p = PauliString.from_label("".join(rng.permutation(list(lab))))
        theta = float(rng.uniform(-3, 3))
        np.testing.assert_allclose(circuit_unitary(pauli_rotation(p, theta)),
                                   expm(-0.5j * theta * p.to_dense()), atol=1e-12)


def test_fused_and_ladder_agree(rng):
    n = 7
    c = Circuit(n)
    for _ in range(25):
        x, z = (int(v) for v in rng.integers(0, 1 << n, 2))
        if x | z:
            c.pauli_rotation(PauliString(n, x, z), float(rng.uniform(-2, 2)))
    psi = StateVector.random(n, rng)
    a = apply(c, psi, fused=True).amplitudes
    b = apply(c, psi, fused=False).amplitudes
    assert np.max(np.abs(a - b)) <= 1e-12


def test_norm_and_unitarity(rng):
    c = random_circuit(4, 40, rng)
    u = circuit_unitary(c)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(16), atol=1e-12)
    psi = StateVector.random(4, rng)
    assert apply(c, psi).norm == pytest.approx(1, abs=1e-12)


def test_inverse(rng):
    c = random_circuit(3, 30, rng)
    c.pauli_rotation(PauliString.from_label("XYZ"), 0.3)
    np.testing.assert_allclose(circuit_unitary(c.inverse()) @ circuit_unitary(c), np.eye(8), atol=1e-12)


def test_text_roundtrip(rng):
    c = random_circuit(5, 30, rng)
    back = parse_text(c.to_text())
    np.testing.assert_allclose(circuit_unitary(back), circuit_unitary(c), atol=1e-12)


def test_cnot_depth_schedules_disjoint_pairs():
    c = Circuit(4).add("CNOT", 0, 1).add("CNOT", 2, 3).add("H", 1).add("CNOT", 1, 2)
    k = c.counts()
    assert (k.cnot_count, k.cnot_depth) == (3, 2)


def test_invalid_gates():
    with pytest.raises(ValueError):
        Circuit(2).add("RX", 0)
    with pytest.raises(ValueError):
        Circuit(2).add("CNOT", 0, 2)
    with pytest.raises(ValueError):
        Circuit(2).add("FOO", 0)


def test_expectation_basics():
    plus = apply(Circuit(1).add("H", 0), StateVector.zero(1))
    z = PauliSum.single(1, 0, "Z")
    assert expectation(z, plus) == pytest.approx(0, abs=1e-15)
    assert expectation(z, StateVector.zero(1)) == 1


def test_expectation_matches_dense(rng):
    n = 5
    labels = ["".join(rng.choice(list("IXYZ"), n)) for _ in range(12)]
    h = PauliSum.from_terms(n, [(float(rng.normal()), lab) for lab in labels]).simplify()
    psi = StateVector.random(n, rng)
    v = psi.amplitudes
    assert expectation(h, psi) == pytest.approx((v.conj() @ h.to_dense() @ v).real, abs=1e-12)


def test_exact_evolve_basics(rng):
    h = PauliSum.single(1, 0, "Z")
    psi = StateVector.random(1, rng)
    np.testing.assert_allclose(exact_evolve(h, 0.0, psi).amplitudes, psi.amplitudes, atol=1e-15)
    plus = apply(Circuit(1).add("H", 0), StateVector.zero(1))
    x = PauliSum.single(1, 0, "X")
    assert expectation(x, exact_evolve(h, np.pi / 2, plus)) == pytest.approx(-1, abs=1e-12)
    h3 = PauliSum.from_terms(3, [(0.4, "XYZ"), (1.1, "IZZ"), (-0.3, "XII")])
    psi = StateVector.random(3, rng)
    assert expectation(h3, exact_evolve(h3, 1.3, psi)) == pytest.approx(expectation(h3, psi), abs=1e-10)


def test_eigensystem_z():
    w = [e for e, _ in exact_eigensystem(PauliSum.single(1, 0, "Z"), 2)]
    assert w == [-1.0, 1.0]


def test_eigensystem_reproducible():
    from lgt_forge.encoding import LinkTruncation
    from lgt_forge.lattice import LatticeSpec
    from lgt_forge.qed import QEDParams, gauss_sector_basis, h_total

    p = QEDParams(LatticeSpec(2, 2), LinkTruncation(1), m=0.5)
    h, basis = h_total(p), gauss_sector_basis(p)
    a = exact_eigensystem(h, 1, basis=basis)[0]
    b = exact_eigensystem(h, 1, basis=basis)[0]
    assert a[0] == b[0]
    assert np.array_equal(a[1].amplitudes, b[1].amplitudes)


def test_degenerate_diagonal_ground_state():
    h = PauliSum.from_terms(12, [(1.0, "Z" + "I" * 11), (1.0, "I" * 11 + "Z")])
    assert exact_eigensystem(h, 1)[0][0] == pytest.approx(-2)


def test_capacity_guard():
    with pytest.raises(CapacityError):
        exact_eigensystem(PauliSum.single(14, 0, "Z"), 1)


def test_snapshot_roundtrip(tmp_path, rng):
    psi = StateVector.random(4, rng)
    bin_path, head = psi.save(tmp_path / "state")
    assert bin_path.stat().st_size == 16 * 16
    back = StateVector.load(tmp_path / "state")
    assert np.array_equal(back.amplitudes, psi.amplitudes)


def test_permute_qubits(rng):
    psi = StateVector.random(3, rng)
    swap = apply(Circuit(3).add("SWAP", 0, 2), psi)
    np.testing.assert_allclose(permute_qubits(psi, (2, 1, 0)).amplitudes, swap.amplitudes, atol=1e-15)


def test_backend_reported():
    assert kernels.BACKEND in {"cython", "numpy"}
