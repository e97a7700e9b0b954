"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import json
import os
import subprocess
import sys
import time

import jsonschema
import numpy as np
import pytest
from scipy.linalg import expm

from lgt_forge.cli import results_schema
from lgt_forge.encoding import LinkTruncation
from lgt_forge.lattice import LatticeSpec
from lgt_forge.neutrino import NeutrinoEnsemble, build_h, make_ensemble, survival_probability_oracle
from lgt_forge.pauli import PauliString, PauliSum
from lgt_forge.qed import QEDParams, dirac_vacuum_index, gauss_operator, gauss_sector_basis, h_total
from lgt_forge.resources import BUILDERS, empirical_counts, plaquette_dominance
from lgt_forge.statevector import Propagator, StateVector, circuit_unitary, exact_eigensystem, expectation
from lgt_forge.trotter import TrotterPlan, neutrino_count_formula, neutrino_swap_network, synthesize
from lgt_forge.variational import (
    OptConfig,
    finite_difference_gradient,
    gradient,
    hamiltonian_variational,
    hardware_efficient,
    pauli_rotation_ansatz,
    qed_variational,
    varqite,
    varqte,
    vqd,
    vqe,
)

QED_LAYERS = 5


@pytest.fixture(scope="module")
def qed22():
    p = QEDParams(LatticeSpec(2, 2), LinkTruncation(1), m=0.5)
    lay = p.layout()
    h = h_total(p, lay)
    basis = gauss_sector_basis(p, lay)
    exact = [e for e, _ in exact_eigensystem(h, 3, basis=basis)]
    return p, lay, h, exact


@pytest.mark.criterion(1, "neutrino SWAP-network gate counts")
def test_c1_neutrino_gate_counts(verdict):
    start = time.perf_counter()
    measured = {}
    for order in (1, 2):
        for n in range(2, 65):
            e = make_ensemble(n, np.random.default_rng(n))
            k = neutrino_swap_network(e, 0.1, order).counts()
            measured[order, n] = (k.cnot_count, k.cnot_depth)
    elapsed = time.perf_counter() - start
    bad = [(o, n, measured[o, n], neutrino_count_formula(n, o))
           for (o, n) in sorted(measured) if measured[o, n] != neutrino_count_formula(n, o)]
    table_point = measured[1, 40] == (2340, 120)
    for o, n, got, want in bad[:8]:
        print(f"  order {o} N={n}: got {got}, formula {want}")
    ok = not bad and table_point and elapsed < 1.0
    verdict(ok, f"{len(bad)} of 126 (N, order) mismatches, N=40 -> {measured[1, 40]}, {elapsed:.2f} s")


def _slope(h, order):
    ns = [4, 8, 16, 32, 64]
    exact = expm(-1j * h.to_dense())
    errs = [np.linalg.norm(circuit_unitary(synthesize(h, 1.0, TrotterPlan(order, n))) - exact, 2) for n in ns]
    return float(np.polyfit(np.log(ns), np.log(errs), 1)[0])


@pytest.mark.criterion(2, "Trotter order scaling")
def test_c2_trotter_order_scaling(verdict):
    systems = {
        "X+Z": PauliSum.from_terms(1, [(1.0, "X"), (1.0, "Z")]),
        "neutrino N=2": build_h(make_ensemble(2, np.random.default_rng(0), mu=1.0, lambda_e=0.2)),
    }
    slopes = {(name, o): _slope(h, o) for name, h in systems.items() for o in (1, 2)}
    ok = all(abs(s + o) <= 0.1 for (_, o), s in slopes.items())
    detail = ", ".join(f"{name} p={o}: {s:.3f}" for (name, o), s in slopes.items())
    verdict(ok, detail)


@pytest.mark.criterion(3, "Pauli-count exponent fits and plaquette dominance")
def test_c3_exponent_fits(verdict):
    start = time.perf_counter()
    full = range(1, 7)
    fits = [
        ("E^2", "logarithmic", empirical_counts(BUILDERS["electric"], full, "logarithmic", "electric"), 1),
        ("U", "linear", empirical_counts(BUILDERS["single_u"], full, "linear", "single_u"), 1),
        ("U", "logarithmic", empirical_counts(BUILDERS["single_u"], full, "logarithmic", "single_u"), 2),
        ("plaquette", "linear",
         empirical_counts(BUILDERS["plaquette"], range(1, 4), "linear", "plaquette", min_points=3), 4),
    ]
    dominance = [plaquette_dominance(range(1, 4), s) for s in ("linear", "logarithmic")]
    elapsed = time.perf_counter() - start
    parts = []
    ok = elapsed < 60
    for term, scheme, r, target in fits:
        good = abs(r.exponent - target) <= 0.3
        ok &= good
        parts.append(f"{term}/{scheme} {r.exponent:.2f} vs {target} [{'ok' if good else 'off'}]")
        print(f"  {term}/{scheme}: d_S={r.d_S} counts={r.counts}")
    ok &= all(d.holds for d in dominance)
    parts.append(f"dominance {'holds' if all(d.holds for d in dominance) else 'fails'}")
    verdict(ok, "; ".join(parts) + f"; {elapsed:.1f} s")


@pytest.mark.criterion(4, "QED correctness suite")
def test_c4_qed_correctness(verdict, qed22):
    start = time.perf_counter()
    p, lay, h, _ = qed22
    hermitian = h.is_hermitian() and np.abs((h.to_sparse() - h.to_sparse().conj().T)).max() == 0
    hs = h.to_sparse()
    gauss = [gauss_operator(n, p, lay) for n in range(p.geometry.n_sites)]
    comm = max(abs(hs @ g.to_sparse() - g.to_sparse() @ hs).max() for g in gauss)

    basis = gauss_sector_basis(p, lay)
    rng = np.random.default_rng(4)
    amp = np.zeros(1 << lay.total_qubits, dtype=complex)
    amp[basis] = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    psi0 = StateVector.from_array(amp / np.linalg.norm(amp))
    prop = Propagator(h)
    g2 = [g @ g for g in gauss]
    leak = max(expectation(q, prop.evolve(psi0, t)) for t in np.linspace(0, 5, 11) for q in g2)

    ground = []
    for g in (1.0, 10.0, 100.0):
        q = QEDParams(LatticeSpec(2, 2), LinkTruncation(1), g=g, m=0.0)
        ground.append(exact_eigensystem(h_total(q), 1, basis=gauss_sector_basis(q))[0][0])
    strong = abs(ground[2]) < 1e-3 and abs(ground[2]) < abs(ground[1]) < abs(ground[0])
    elapsed = time.perf_counter() - start
    ok = hermitian and comm <= 1e-10 and leak <= 1e-10 and strong and elapsed < 60
    verdict(ok, f"hermitian={hermitian}, max|[H,G]|={comm:.1e}, max<G^2>={leak:.1e}, "
                f"E0(g=1,10,100)={[f'{e:.2e}' for e in ground]}, {elapsed:.1f} s")


@pytest.mark.criterion(5, "VQE and VQD")
def test_c5_vqe_vqd(verdict, qed22):
    p, lay, h, exact = qed22
    ry = pauli_rotation_ansatz([PauliString.from_label("Y")])
    z = PauliSum.single(1, 0, "Z")
    single = vqe(ry, z, OptConfig(seed=0))
    single_ok = abs(single.energy + 1) <= 1e-8

    a = qed_variational(p, lay, QED_LAYERS)
    runs = [vqe(a, h, OptConfig(seed=s)) for s in range(50)]
    lowest = min(min(r.trace) for r in runs)
    bound_ok = lowest >= exact[0] - 1e-10
    ground_err = abs(runs[0].energy - exact[0])

    levels = vqd(a, h, 2, cfg=OptConfig(seed=0))
    excited_err = abs(levels[1].energy - exact[1])
    ok = single_ok and bound_ok and ground_err <= 1e-3 and excited_err <= 1e-2
    verdict(ok, f"H=Z error {abs(single.energy + 1):.1e}, QED ground error {ground_err:.1e}, "
                f"first excited error {excited_err:.1e}, min over 50 runs - E0 = {lowest - exact[0]:.1e}")


@pytest.mark.criterion(6, "varQTE and varQITE")
def test_c6_variational_dynamics(verdict, qed22):
    # Rabi: RX(theta) under H = X rotates as exp(-i t X), theta(t) = 2t
    x = PauliSum.single(1, 0, "X")
    rabi = varqte(pauli_rotation_ansatz([PauliString.from_label("X")]), [0.0], x, 1.0, dt=1e-3)
    closed = [np.array([np.cos(t), -1j * np.sin(t)]) for t in rabi.times]
    rabi_fid = min(abs(np.vdot(c, pauli_rotation_ansatz([PauliString.from_label("X")]).prepare(th))) ** 2
                   for c, th in zip(closed, rabi.thetas))

    e2 = make_ensemble(2, np.random.default_rng(1), mu=1.0)
    h2 = build_h(e2)
    strings = [PauliString(2, xm, zm) for xm in range(4) for zm in range(4) if xm | zm]
    nu = varqte(pauli_rotation_ansatz(strings), np.zeros(len(strings)), h2, 1.0, dt=1e-3)
    nu_fid = nu.fidelities[-1]

    monotone = []
    z = PauliSum.single(1, 0, "Z")
    tr = varqite(pauli_rotation_ansatz([PauliString.from_label("Y")]), [np.pi / 2], z, 5.0, dtau=0.05)
    monotone.append(tr.energies)
    rng = np.random.default_rng(6)
    for n in (2, 3, 4):
        labels = ["".join(rng.choice(list("IXYZ"), n)) for _ in range(6)]
        h = PauliSum.from_terms(n, [(float(rng.normal()), lab) for lab in labels]).simplify()
        a = hardware_efficient(n, 2)
        monotone.append(varqite(a, rng.normal(scale=0.3, size=a.n_params), h, 1.0, dtau=0.05).energies)
    monotone.append(varqite(hardware_efficient(3, 2), np.full(18, 0.2),
                            build_h(make_ensemble(3, np.random.default_rng(2))), 1.0, dtau=0.05).energies)

    p, lay, h, exact = qed22
    a = qed_variational(p, lay, QED_LAYERS)
    theta0 = 0.1 * np.random.default_rng(0).standard_normal(a.n_params)
    qite = varqite(a, theta0, h, 3.0, dtau=0.05)
    monotone.append(qite.energies)
    qed_err = qite.energies[-1] - exact[0]
    mono_ok = all(np.all(np.diff(e) <= 1e-8) for e in monotone)

    ok = rabi_fid >= 1 - 1e-8 and nu_fid >= 0.999 and mono_ok and abs(qed_err) <= 1e-3
    verdict(ok, f"Rabi min fidelity 1-{1 - rabi_fid:.1e}, 2-neutrino fidelity {nu_fid:.6f}, "
                f"monotone on {len(monotone)} instances={mono_ok}, QED varQITE error {qed_err:.1e}")


def _random_triple(rng):
    n = int(rng.integers(1, 7))
    family = int(rng.integers(3))
    if family == 0:
        a = hardware_efficient(n, int(rng.integers(1, 3)), rotations=("Y", "Z") if rng.random() < 0.5 else ("X", "Y"))
    elif family == 1:
        strings = [PauliString(n, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n))) for _ in range(6)]
        strings = [s for s in strings if s.x | s.z] or [PauliString.single(n, 0, "Y")]
        a = pauli_rotation_ansatz(strings, int(rng.integers(1, 3)))
    else:
        groups = []
        for _ in range(3):
            labels = ["".join(rng.choice(list("IXYZ"), n)) for _ in range(2)]
            g = PauliSum.from_terms(n, [(float(rng.uniform(-1, 1)), lab) for lab in labels]).simplify()
            if any(s.weight for _, s in g.terms):
                groups.append(g)
        groups = groups or [PauliSum.single(n, 0, "X")]
        a = hamiltonian_variational(groups, 2, reference=int(rng.integers(0, 1 << n)))
    labels = ["".join(rng.choice(list("IXYZ"), n)) for _ in range(8)]
    h = PauliSum.from_terms(n, [(float(rng.normal()), lab) for lab in labels]).simplify()
    theta = rng.uniform(-np.pi, np.pi, a.n_params)
    return a, h, theta


@pytest.mark.criterion(7, "parameter-shift vs finite-difference gradients")
def test_c7_gradient_consistency(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        a, h, theta = _random_triple(rng)
        worst = max(worst, float(np.max(np.abs(gradient(a, theta, h) - finite_difference_gradient(a, theta, h)))))
    elapsed = time.perf_counter() - start
    verdict(worst <= 1e-6 and elapsed < 60, f"max componentwise difference {worst:.1e} over 100 triples, {elapsed:.1f} s")


@pytest.mark.criterion(8, "single-neutrino oscillation oracle")
def test_c8_single_neutrino(verdict):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(10):
        dm2, energy, theta = rng.uniform(0.1, 3.0), rng.uniform(0.2, 5.0), rng.uniform(0, np.pi / 2)
        e = NeutrinoEnsemble(1, dm2, theta, (energy,), ((0.0, 0.0, 1.0),))
        prop = Propagator(build_h(e))
        psi0 = StateVector.zero(1)
        period = np.pi / np.linalg.norm(e.b_vector(0))
        for t in np.linspace(0, 3 * period, 100):
            p = abs(prop.evolve(psi0, t).amplitudes[0]) ** 2
            worst = max(worst, abs(p - survival_probability_oracle(e, t)))
    verdict(worst <= 1e-8, f"max |P_sim - P_closed| = {worst:.1e} over 10 x 100 points")


def _jobs():
    seedless = {
        "gates1": {"command": "neutrino-gates", "neutrino": {"N": 2},
                   "algorithm": {"order": 1, "N_min": 2, "N_max": 64}},
        "gates2": {"command": "neutrino-gates", "neutrino": {"N": 2},
                   "algorithm": {"order": 2, "N_min": 2, "N_max": 64}},
        "trotter": {"command": "evolve-trotter", "model": "neutrino", "neutrino": {"N": 2, "lambda_e": 0.2},
                    "algorithm": {"T": 1.0, "n_steps": 16, "order": 2}},
        "resources": {"command": "resources"},
        "spectrum": {"command": "spectrum", "model": "qed2p1", "qed": {"m": 0.5}, "algorithm": {"k": 3}},
        "single": {"command": "evolve-trotter", "model": "neutrino",
                   "neutrino": {"N": 1, "delta_m2": 1.3, "theta_v": 0.6, "energies": [0.8], "momenta": [[0, 0, 1]]},
                   "algorithm": {"T": 5.0, "n_steps": 100}},
    }
    seeded = {
        "vqe": {"command": "vqe", "model": "qed2p1", "qed": {"m": 0.5},
                "algorithm": {"layers": QED_LAYERS, "seed": 0}},
        "vqd": {"command": "vqd", "model": "qed2p1", "qed": {"m": 0.5},
                "algorithm": {"layers": QED_LAYERS, "seed": 0, "k": 2}},
        "varqte": {"command": "evolve-varqte", "model": "neutrino", "neutrino": {"N": 2, "direction_seed": 1},
                   "algorithm": {"ansatz": "pauli_rotations", "layers": 1, "seed": 0, "init_scale": 0.0,
                                 "T": 1.0, "dt": 1e-3, "record_every": 50}},
        "varqite": {"command": "evolve-varqite", "model": "qed2p1", "qed": {"m": 0.5},
                    "algorithm": {"layers": QED_LAYERS, "seed": 0, "beta_max": 3.0, "dtau": 0.05}},
    }
    return {**seedless, **seeded}


@pytest.mark.criterion(9, "byte-identical artifacts across repeated runs")
def test_c9_determinism(verdict, tmp_path):
    env = dict(os.environ, LGT_FORGE_THREADS="1")
    differing, failed = [], []
    jobs = _jobs()
    for name, cfg in jobs.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(cfg))
        trees = []
        for rep in ("a", "b"):
            out = tmp_path / rep / name
            proc = subprocess.run([sys.executable, "-m", "lgt_forge", "run", "--config", str(path),
                                   "--output", str(out)], env=env, capture_output=True, text=True)
            if proc.returncode != 0:
                failed.append(f"{name}: {proc.stderr.strip()}")
                break
            trees.append({f.name: f.read_bytes() for f in sorted(out.iterdir())})
        if len(trees) != 2:
            continue
        jsonschema.validate(json.loads(trees[0]["results.json"]), results_schema())
        if trees[0] != trees[1]:
            differing.append(name)
    for line in failed:
        print("  " + line)
    ok = not differing and not failed
    verdict(ok, f"{len(jobs)} jobs run twice; differing={differing or 'none'}; failed={len(failed)}")
