import numpy as np
import pytest

from lgt_forge.encoding import (
    LinkTruncation,
    Scheme,
    build_layout,
    jw_op,
    link_E,
    link_dense,
    link_U,
)
from lgt_forge.lattice import LatticeSpec, build_geometry
from lgt_forge.pauli import PauliSum

SCHEMES = [Scheme.LINEAR, Scheme.LOGARITHMIC]


def test_log_l1_field():
    e = link_E(LinkTruncation(1, Scheme.LOGARITHMIC))
    assert e.labels() == pytest.approx({"ZI": -0.5, "ZZ": -0.5})


def test_linear_l1_field_eigenvalues():
    t = LinkTruncation(1, Scheme.LINEAR)
    diag = link_E(t).diagonal().real
    for k, e in enumerate(t.levels):
        assert diag[1 << k] == pytest.approx(e)


@pytest.mark.parametrize("scheme", SCHEMES)
@pytest.mark.parametrize("l", [1, 2, 3])
def test_trace_of_field_vanishes(scheme, l):
    t = LinkTruncation(l, scheme)
    assert np.trace(link_dense(link_E(t), t)) == pytest.approx(0)


@pytest.mark.parametrize("scheme", SCHEMES)
def test_l1_lowering_matrix(scheme):
    t = LinkTruncation(1, scheme)
    np.testing.assert_allclose(link_dense(link_U(t), t), np.eye(3, k=1), atol=1e-14)


def test_log_padding_rows_are_zero():
    t = LinkTruncation(1, Scheme.LOGARITHMIC)
    u = link_U(t).to_dense()
    assert np.allclose(u[3, :], 0) and np.allclose(u[:, 3], 0)


@pytest.mark.parametrize("scheme", SCHEMES)
@pytest.mark.parametrize("l", [1, 2, 3, 4])
def test_ladder_algebra(scheme, l):
    t = LinkTruncation(l, scheme)
    e, u = link_dense(link_E(t), t), link_dense(link_U(t), t)
    np.testing.assert_allclose(e @ u - u @ e, -u, atol=1e-12)
    lv = t.levels
    np.testing.assert_allclose(u.conj().T @ u, np.diag((lv > -l).astype(float)), atol=1e-12)
    np.testing.assert_allclose(u @ u.conj().T, np.diag((lv < l).astype(float)), atol=1e-12)


@pytest.mark.parametrize("l", [1, 2, 3])
def test_linear_never_leaves_one_hot(l):
    t = LinkTruncation(l, Scheme.LINEAR)
    legal = t.physical_states()
    illegal = [s for s in range(1 << t.qubits_per_link) if s not in legal]
    for op in (link_E(t), link_U(t)):
        m = op.to_dense()
        assert np.allclose(m[np.ix_(illegal, legal)], 0)


def test_perfect_ladder():
    t = LinkTruncation(2, Scheme.LOGARITHMIC, perfect=True)
    assert t.d_S == 4 and t.qubits_per_link == 2 and 0 not in t.levels
    with pytest.raises(ValueError):
        LinkTruncation(3, Scheme.LOGARITHMIC, perfect=True)


def test_bad_truncation():
    with pytest.raises(ValueError):
        LinkTruncation(0)


def test_jw_single_mode():
    c = jw_op(0, "create", 1)
    assert c.labels() == pytest.approx({"X": 0.5, "Y": -0.5j})


def test_jw_string():
    c = jw_op(2, "create", 4)
    assert c.labels() == pytest.approx({"IXZZ": 0.5, "IYZZ": -0.5j})


def test_jw_anticommutator():
    c, a = jw_op(1, "create", 3), jw_op(1, "annihilate", 3)
    np.testing.assert_allclose((c @ a + a @ c).to_dense(), np.eye(8), atol=1e-14)
    c0 = jw_op(0, "create", 3)
    assert len((c0 @ a + a @ c0).simplify()) == 0


@pytest.mark.parametrize("lx, ly, scheme, total", [
    (2, 2, Scheme.LOGARITHMIC, 12),
    (2, 2, Scheme.LINEAR, 16),
    (4, 4, Scheme.LOGARITHMIC, 64),
])
def test_layout_sizes(lx, ly, scheme, total):
    lay = build_layout(build_geometry(LatticeSpec(lx, ly)), LinkTruncation(1, scheme))
    assert lay.total_qubits == total
    used = list(lay.site_qubit) + [q for lo, hi in lay.link_qubits for q in range(lo, hi)]
    assert sorted(used) == list(range(total))
