import numpy as np
import pytest
from scipy.linalg import expm

from lgt_forge.neutrino import build_h, make_ensemble
from lgt_forge.pauli import PauliString, PauliSum
from lgt_forge.statevector import StateVector, exact_eigensystem, expectation
from lgt_forge.variational import (
    Ansatz,
    OptConfig,
    PauliOp,
    assemble_mclachlan,
    energy,
    finite_difference_gradient,
    gradient,
    gradient_adjoint,
    hardware_efficient,
    hamiltonian_variational,
    pauli_rotation_ansatz,
    varqite,
    varqte,
    vqd,
    vqe,
)

Z = PauliSum.single(1, 0, "Z")
X = PauliSum.single(1, 0, "X")


def ry():
    return pauli_rotation_ansatz([PauliString.from_label("Y")])


def random_hamiltonian(n, rng, terms=8):
    labels = ["".join(rng.choice(list("IXYZ"), n)) for _ in range(terms)]
    return PauliSum.from_terms(n, [(float(rng.normal()), lab) for lab in labels]).simplify()


@pytest.mark.parametrize("theta", [0.0, np.pi, 0.37, -2.1])
def test_ry_energy(theta):
    assert energy(ry(), [theta], Z) == pytest.approx(np.cos(theta), abs=1e-14)


def test_ry_gradient():
    assert gradient(ry(), [np.pi / 2], Z)[0] == pytest.approx(-1, abs=1e-14)
    assert gradient(ry(), [0.0], Z)[0] == pytest.approx(0, abs=1e-14)


def test_gradients_agree_six_qubits(rng):
    a = hardware_efficient(6, 2)
    h = random_hamiltonian(6, rng, 15)
    theta = rng.uniform(-np.pi, np.pi, a.n_params)
    ps = gradient(a, theta, h)
    fd = finite_difference_gradient(a, theta, h)
    e, adj = gradient_adjoint(a, theta, h)
    assert np.max(np.abs(ps - fd)) <= 1e-6
    assert np.max(np.abs(ps - adj)) <= 1e-10
    assert e == pytest.approx(energy(a, theta, h), abs=1e-12)


def test_shared_parameter_gradient(rng):
    groups = [PauliSum.from_terms(3, [(0.5, "XXI"), (0.3, "IYY")]), PauliSum.from_terms(3, [(1.0, "ZIZ"), (0.2, "IZI")])]
    a = hamiltonian_variational(groups, 2, reference=5)
    h = random_hamiltonian(3, rng)
    theta = rng.normal(size=a.n_params)
    assert np.max(np.abs(gradient(a, theta, h) - finite_difference_gradient(a, theta, h))) <= 1e-6


def test_vqe_single_qubit():
    res = vqe(ry(), Z, OptConfig(seed=3))
    assert res.energy == pytest.approx(-1, abs=1e-8)
    assert abs(np.cos(res.theta[0]) + 1) <= 1e-8
    assert res.converged


def test_vqe_gradient_descent_option():
    res = vqe(ry(), Z, OptConfig(seed=1, method="gd", max_iter=2000))
    assert res.energy == pytest.approx(-1, abs=1e-8)
    assert all(b <= a + 1e-12 for a, b in zip(res.trace, res.trace[1:]))


def test_vqe_is_deterministic():
    a = hardware_efficient(2, 1)
    h = PauliSum.from_terms(2, [(1.0, "ZZ"), (0.5, "XI"), (0.3, "IX")])
    r1, r2 = vqe(a, h, OptConfig(seed=4)), vqe(a, h, OptConfig(seed=4))
    assert r1.energy == r2.energy and np.array_equal(r1.theta, r2.theta)


def test_vqe_neutrino_bound():
    e = make_ensemble(4, np.random.default_rng(0))
    h = build_h(e)
    exact = exact_eigensystem(h, 1)[0][0]
    a = hardware_efficient(4, 2)
    for seed in range(3):
        res = vqe(a, h, OptConfig(seed=seed, max_iter=200))
        assert res.energy >= exact - 1e-10
        assert min(res.trace) >= exact - 1e-10


def test_vqd_two_levels():
    levels = vqd(ry(), Z, 2, cfg=OptConfig(seed=0))
    np.testing.assert_allclose([lv.energy for lv in levels], [-1, 1], atol=1e-7)
    assert levels[1].overlaps[0] <= 1e-4


def test_mclachlan_single_ry():
    sys = assemble_mclachlan(ry(), [0.0], Z)
    np.testing.assert_allclose(sys.M, [[0.25]], atol=1e-15)
    zero = PauliSum.zero(1)
    assert np.allclose(assemble_mclachlan(ry(), [0.3], zero).V, 0)


def test_mclachlan_properties(rng):
    a = hardware_efficient(3, 2)
    h = random_hamiltonian(3, rng)
    theta = rng.normal(size=a.n_params)
    sys = assemble_mclachlan(a, theta, h)
    np.testing.assert_allclose(sys.M, sys.M.T, atol=1e-14)
    assert np.linalg.eigvalsh(sys.M).min() >= -1e-12
    x, reg, _ = sys.solve(1e-8)
    resid = (sys.M + reg * np.eye(a.n_params)) @ x - sys.V
    assert np.linalg.norm(resid) <= 1e-10


def test_global_phase_parameter_is_ignored(rng):
    y = PauliString.from_label("YI")
    xx = PauliString.from_label("XX")
    base = Ansatz(2, [PauliOp(0, y), PauliOp(1, xx)], 2)
    phased = Ansatz(2, [PauliOp(0, y), PauliOp(1, xx), PauliOp(2, PauliString(2, 0, 0))], 3)
    h = PauliSum.from_terms(2, [(0.7, "XI"), (0.4, "ZZ"), (0.2, "IY")])
    theta = np.array([0.3, -0.8])
    x0, _, _ = assemble_mclachlan(base, theta, h).solve(1e-10)
    x1, _, _ = assemble_mclachlan(phased, np.r_[theta, 0.5], h).solve(1e-10)
    np.testing.assert_allclose(x1[:2], x0, atol=1e-7)


def test_varqte_trivial_dynamics():
    tr = varqte(ry(), [0.0], Z, 1.0, dt=1e-2)
    assert np.allclose(tr.thetas[-1], 0)
    assert min(tr.fidelities) >= 1 - 1e-12


def test_varqte_rabi():
    a = pauli_rotation_ansatz([PauliString.from_label("X")])
    tr = varqte(a, [0.0], X, 1.0, dt=1e-3)
    assert tr.thetas[-1][0] == pytest.approx(2.0, abs=1e-6)
    assert min(tr.fidelities) >= 1 - 1e-8


def test_ry_driven_by_x_is_stationary():
    # RY orbit from |0> is real; the X drive leaves it at first order
    tr = varqte(ry(), [0.0], X, 0.5, dt=1e-2)
    assert np.allclose(tr.thetas[-1], 0)
    assert tr.fidelities[-1] < 0.8


def test_varqite_single_qubit():
    tr = varqite(ry(), [np.pi / 2], Z, 6.0, dtau=0.05)
    assert tr.energies[-1] == pytest.approx(-1, abs=1e-6)
    assert abs(np.cos(tr.thetas[-1][0]) + 1) <= 1e-6
    assert all(b <= a + 1e-8 for a, b in zip(tr.energies, tr.energies[1:]))


def test_varqite_monotone_random(rng):
    a = hardware_efficient(3, 2)
    h = random_hamiltonian(3, rng)
    theta0 = rng.normal(scale=0.3, size=a.n_params)
    tr = varqite(a, theta0, h, 1.0, dtau=0.05)
    assert all(b <= a + 1e-8 for a, b in zip(tr.energies, tr.energies[1:]))
    assert tr.energies[-1] >= exact_eigensystem(h, 1)[0][0] - 1e-10


def test_trajectory_csv():
    tr = varqte(ry(), [0.1], X, 0.05, dt=1e-2)
    lines = tr.to_csv().splitlines()
    assert lines[0].split(",")[:3] == ["step", "time", "energy"]
    assert len(lines) == len(tr.times) + 1


def test_hva_preserves_gauss_sector():
    from lgt_forge.encoding import LinkTruncation
    from lgt_forge.lattice import LatticeSpec
    from lgt_forge.qed import QEDParams, gauss_operator, h_total
    from lgt_forge.variational import qed_variational

    p = QEDParams(LatticeSpec(2, 2), LinkTruncation(1), m=0.5)
    lay = p.layout()
    h = h_total(p, lay)
    a = qed_variational(p, lay, 1)
    tr = varqte(a, np.zeros(a.n_params), h, 0.2, dt=0.02, oracle=False)
    g2 = [gauss_operator(n, p, lay) @ gauss_operator(n, p, lay) for n in range(4)]
    for theta in tr.thetas:
        psi = a.state(theta)
        assert max(expectation(g, psi) for g in g2) <= 1e-10


def test_parameter_count_validation():
    with pytest.raises(ValueError):
        Ansatz(1, [PauliOp(0, PauliString.from_label("Y"))], 2)
    with pytest.raises(ValueError):
        energy(ry(), [0.1, 0.2], Z)
