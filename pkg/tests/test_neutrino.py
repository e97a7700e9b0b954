import math

import numpy as np
import pytest

from lgt_forge.neutrino import (
    NeutrinoEnsemble,
    Profile,
    build_h,
    make_ensemble,
    mass_axis_generator,
    survival_probability_oracle,
    total_spin_squared,
)
from lgt_forge.statevector import StateVector, exact_eigensystem, exact_evolve, expectation

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2)


def two_body_count(h):
    return sum(1 for _, s in h.terms if s.weight == 2)


def test_collinear_pair_does_not_interact():
    e = NeutrinoEnsemble(2, 1.0, 0.3, (1.0, 2.0), ((0, 0, 1), (0, 0, 1)), mu=1.0)
    assert two_body_count(build_h(e)) == 0


def test_single_neutrino_two_terms():
    e = make_ensemble(1)
    h = build_h(e)
    assert sorted(h.labels()) == ["X", "Z"]


def test_four_neutrinos_term_count():
    h = build_h(make_ensemble(4, np.random.default_rng(3)))
    assert two_body_count(h) == 18
    assert len(h) == 26


def test_two_neutrinos_hand_built():
    e = make_ensemble(2, np.random.default_rng(5), mu=2.0, lambda_e=0.4)
    h = build_h(e)
    b = [np.asarray(e.b_vector(i)) for i in range(2)]
    one = [b[i][0] * X + b[i][1] * Y + (b[i][2] + 0.4) * Z for i in range(2)]
    cos = float(np.dot(e.momenta[0], e.momenta[1]))
    j = 2.0 / (2 * 2) * (1 - cos)
    dense = np.kron(I2, one[0]) + np.kron(one[1], I2) + j * sum(np.kron(P, P) for P in (X, Y, Z))
    np.testing.assert_allclose(h.to_dense(), dense, atol=1e-13)
    w = [x for x, _ in exact_eigensystem(h, 4)]
    np.testing.assert_allclose(w, np.linalg.eigvalsh(dense), atol=1e-12)


def test_vacuum_term_direction():
    e = NeutrinoEnsemble(1, 2.0, 0.4, (0.5,), ((1, 0, 0),))
    w = 2.0 / (4 * 0.5)
    np.testing.assert_allclose(e.b_vector(0), [w * math.sin(0.8), 0, -w * math.cos(0.8)], atol=1e-15)


def test_oracle_limits():
    e = make_ensemble(1, delta_m2=1.3, theta_v=0.7)
    assert survival_probability_oracle(e, 0.0) == 1.0
    flat = make_ensemble(1, theta_v=0.0)
    for t in (0.3, 1.7, 10.0):
        assert survival_probability_oracle(flat, t) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        survival_probability_oracle(make_ensemble(2), 1.0)


def test_oracle_matches_evolution():
    e = make_ensemble(1, delta_m2=0.8, theta_v=0.5, energies=[0.7])
    h = build_h(e)
    psi = StateVector.zero(1)
    for t in np.linspace(0, 5, 11):
        p = abs(exact_evolve(h, t, psi).amplitudes[0]) ** 2
        assert p == pytest.approx(survival_probability_oracle(e, t), abs=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_mass_axis_symmetry(n):
    e = make_ensemble(n, np.random.default_rng(n))
    h, q = build_h(e).to_dense(), mass_axis_generator(e).to_dense()
    assert np.abs(h @ q - q @ h).max() < 1e-10


def test_equal_angles_conserve_total_spin():
    mom = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    e = NeutrinoEnsemble(3, 0.0, 0.3, (1.0, 1.0, 1.0), tuple(mom), mu=1.5)
    h, s2 = build_h(e).to_dense(), total_spin_squared(3).to_dense()
    assert np.abs(h @ s2 - s2 @ h).max() < 1e-10


def test_energy_conserved(rng):
    e = make_ensemble(4, rng, lambda_e=0.3)
    h = build_h(e)
    psi = StateVector.random(4, rng)
    e0 = expectation(h, psi)
    for t in (0.5, 2.0):
        assert expectation(h, exact_evolve(h, t, psi)) == pytest.approx(e0, abs=1e-10)


def test_profiles():
    p = Profile.coerce([[0, 0.0], [1, 2.0]])
    assert p(0.5) == pytest.approx(1.0) and p(5) == 2.0
    assert Profile.coerce(3.0)(10) == 3.0
    with pytest.raises(ValueError):
        Profile.coerce([[1, 0.0], [0, 1.0]])
    e = NeutrinoEnsemble(1, 1.0, 0.3, (1.0,), ((0, 0, 1),), lambda_e=[[0, 0.0], [2, 1.0]])
    assert build_h(e, 1.0).labels()["Z"] == pytest.approx(-math.cos(0.6) / 4 + 0.5)


def test_validation():
    with pytest.raises(ValueError):
        NeutrinoEnsemble(2, 1.0, 0.3, (1.0,), ((0, 0, 1),))
    with pytest.raises(ValueError):
        NeutrinoEnsemble(1, 1.0, 0.3, (1.0,), ((0, 0, 2),))
    with pytest.raises(ValueError):
        NeutrinoEnsemble(1, 1.0, 0.3, (-1.0,), ((0, 0, 1),))
