"""Batch entry point: ``lgt-forge run --config job.json`` and ``lgt-forge explain``.

A job is a JSON object validated by :class:`JobConfig`. Artifacts are built
in memory and written only once the job has finished, so a failing job
leaves nothing behind. Exit codes: 0 success, 1 runtime failure, 2 invalid
configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from importlib import resources as ilr
from pathlib import Path
from typing import Any, Literal, Optional, Union

import jsonschema
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import kernels
from .encoding import LinkTruncation
from .lattice import LatticeSpec
from .pauli import PauliString, PauliSum

SIG_DIGITS = 12
COMMANDS = ("build", "spectrum", "evolve-trotter", "evolve-varqte", "evolve-varqite",
            "vqe", "vqd", "neutrino-gates", "resources")
STOCHASTIC = {"evolve-varqte", "evolve-varqite", "vqe", "vqd"}
NEEDS_MODEL = {"build", "spectrum", "evolve-trotter", "evolve-varqte", "evolve-varqite", "vqe", "vqd"}


class ConfigError(ValueError):
    pass


# -- configuration ------------------------------------------------------------


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class QEDConfig(_Strict):
    Lx: int = Field(2, ge=2)
    Ly: int = Field(2, ge=2)
    boundary: Literal["open", "periodic"] = "open"
    l: int = Field(1, ge=1)
    scheme: Literal["logarithmic", "linear"] = "logarithmic"
    perfect: bool = False
    g: float = Field(1.0, gt=0)
    m: float = 0.0


ProfileSpec = Union[float, list[tuple[float, float]]]


class NeutrinoConfig(_Strict):
    N: int = Field(2, ge=1)
    delta_m2: float = 1.0
    theta_v: float = 0.3
    energies: Optional[list[float]] = None
    momenta: Optional[list[tuple[float, float, float]]] = None
    direction_seed: int = 0
    lambda_e: ProfileSpec = 0.0
    mu: ProfileSpec = 1.0
    scale: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def _sizes(self):
        if self.energies is not None and len(self.energies) != self.N:
            raise ValueError(f"energies has {len(self.energies)} entries, expected N = {self.N}")
        if self.momenta is not None and len(self.momenta) != self.N:
            raise ValueError(f"momenta has {len(self.momenta)} entries, expected N = {self.N}")
        return self


class AlgorithmConfig(_Strict):
    T: float = Field(1.0, gt=0)
    dt: float = Field(1e-3, gt=0)
    n_steps: int = Field(10, ge=1)
    order: Literal[1, 2] = 1
    record_every: int = Field(1, ge=1)
    ansatz: Literal["hamiltonian_variational", "hardware_efficient", "pauli_rotations"] = "hamiltonian_variational"
    layers: int = Field(4, ge=1)
    seed: Optional[int] = None
    init_scale: float = Field(0.1, ge=0)
    reg: float = Field(1e-8, gt=0)
    integrator: Literal["rk4", "euler"] = "rk4"
    beta_max: float = Field(1.0, gt=0)
    dtau: float = Field(0.05, gt=0)
    max_iter: int = Field(500, ge=1)
    optimizer: Literal["lbfgs", "gd"] = "lbfgs"
    k: int = Field(1, ge=1)
    beta: Optional[float] = Field(None, gt=0)
    restarts: int = Field(1, ge=1)
    sector: bool = True
    N_min: Optional[int] = Field(None, ge=2)
    N_max: Optional[int] = Field(None, ge=2)
    l_values: list[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    plaquette_l_values: list[int] = Field(default_factory=lambda: [1, 2, 3])
    resource_scheme: Literal["logarithmic", "logarithmic_perfect", "linear"] = "logarithmic"
    save_state: bool = False


class JobConfig(_Strict):
    command: Literal["build", "spectrum", "evolve-trotter", "evolve-varqte", "evolve-varqite",
                     "vqe", "vqd", "neutrino-gates", "resources"]
    model: Optional[Literal["qed2p1", "neutrino"]] = None
    qed: Optional[QEDConfig] = None
    neutrino: Optional[NeutrinoConfig] = None
    algorithm: AlgorithmConfig = Field(default_factory=AlgorithmConfig)
    output: str = "lgt_forge_out"

    @model_validator(mode="after")
    def _consistent(self):
        if self.command in NEEDS_MODEL and self.model is None:
            raise ValueError(f"command {self.command!r} needs a model")
        if self.command == "neutrino-gates":
            self.model = "neutrino"
        if self.model == "qed2p1":
            if self.neutrino is not None:
                raise ValueError("neutrino parameters given for the qed2p1 model")
            self.qed = self.qed or QEDConfig()
        elif self.model == "neutrino":
            if self.qed is not None:
                raise ValueError("qed parameters given for the neutrino model")
            self.neutrino = self.neutrino or NeutrinoConfig()
        if self.command in STOCHASTIC and self.algorithm.seed is None:
            raise ValueError(f"command {self.command!r} needs algorithm.seed")
        if self.model == "qed2p1" and self.qed.perfect and self.command not in ("build", "resources"):
            raise ValueError("the perfect ladder has no zero-flux reference state; use it with build only")
        return self


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  {loc}: {e['msg']}")
    return "invalid configuration:\n" + "\n".join(lines)


def load_config(path: str | Path, output: str | None = None, seed: int | None = None) -> JobConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if output is not None:
        raw["output"] = output
    if seed is not None:
        raw.setdefault("algorithm", {})
        if not isinstance(raw["algorithm"], dict):
            raise ConfigError("algorithm must be an object")
        raw["algorithm"]["seed"] = seed
    try:
        return JobConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from exc


# -- formatting -----------------------------------------------------------------


def _round(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in results")
    return float(f"{x:.{SIG_DIGITS}g}")


def _clean(obj: Any) -> Any:
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, complex):
        return {"re": _round(obj.real), "im": _round(obj.imag)}
    return obj


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if x is None:
        return ""
    return f"{float(x):.{SIG_DIGITS}g}"


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in r])
    return buf.getvalue()


def results_schema() -> dict:
    return json.loads(ilr.files("lgt_forge").joinpath("results.schema.json").read_text())


# -- model construction -------------------------------------------------------


def qed_params(c: QEDConfig):
    from .qed import QEDParams

    t = LinkTruncation(c.l, c.scheme, c.perfect)
    return QEDParams(LatticeSpec(c.Lx, c.Ly, c.boundary), t, g=c.g, m=c.m)


def neutrino_ensemble(c: NeutrinoConfig):
    from .neutrino import NeutrinoEnsemble, Profile, random_directions

    energies = c.energies if c.energies is not None else [1.0 + 0.5 * i for i in range(c.N)]
    if c.momenta is not None:
        momenta = c.momenta
    else:
        momenta = random_directions(c.N, np.random.default_rng(c.direction_seed))
    return NeutrinoEnsemble(c.N, c.delta_m2, c.theta_v, tuple(energies), tuple(momenta),
                            Profile.coerce(c.lambda_e), Profile.coerce(c.mu), c.scale)


def _time_dependent(c: NeutrinoConfig) -> bool:
    return any(not isinstance(v, (int, float)) and len(v) > 1 for v in (c.lambda_e, c.mu))


class Model:
    """Hamiltonian, reference state and ansatz factory for one job."""

    def __init__(self, job: JobConfig):
        self.job = job
        self.kind = job.model
        if self.kind == "qed2p1":
            from .qed import h_total

            self.p = qed_params(job.qed)
            self.layout = self.p.layout()
            self.n_qubits = self.layout.total_qubits
            self._h = lambda t=0.0: h_total(self.p, self.layout)
            self.time_dependent = False
        else:
            from .neutrino import build_h

            self.e = neutrino_ensemble(job.neutrino)
            self.n_qubits = self.e.N
            self._h = lambda t=0.0: build_h(self.e, t)
            self.time_dependent = _time_dependent(job.neutrino)
        self._cache: dict[float, PauliSum] = {}

    def h(self, t: float = 0.0) -> PauliSum:
        if not self.time_dependent:
            t = 0.0
        if t not in self._cache:
            self._cache[t] = self._h(t)
        return self._cache[t]

    def reference(self) -> int:
        if self.kind == "qed2p1":
            from .qed import dirac_vacuum_index

            return dirac_vacuum_index(self.p, self.layout)
        return 0  # every neutrino in the electron flavor

    def sector_basis(self):
        if self.kind == "qed2p1" and self.job.algorithm.sector:
            from .qed import gauss_sector_basis

            return gauss_sector_basis(self.p, self.layout)
        return None

    def ansatz(self):
        from . import variational as va

        alg = self.job.algorithm
        ref = self.reference()
        if alg.ansatz == "hardware_efficient":
            return va.hardware_efficient(self.n_qubits, alg.layers, reference=ref)
        if self.kind == "qed2p1":
            if alg.ansatz == "pauli_rotations":
                raise ConfigError("pauli_rotations ansatz is only available for the neutrino model")
            return va.qed_variational(self.p, self.layout, alg.layers)
        n = self.n_qubits
        if alg.ansatz == "pauli_rotations":
            if n > 6:
                raise ConfigError("pauli_rotations enumerates two-local strings and is limited to N <= 6")
            strings = []
            for w in (1, 2):
                for qs in itertools.combinations(range(n), w):
                    for ks in itertools.product("XYZ", repeat=w):
                        p = PauliString.single(n, qs[0], ks[0])
                        for q, k in zip(qs[1:], ks[1:]):
                            p = p @ PauliString.single(n, q, k)
                        strings.append(p)
            return va.pauli_rotation_ansatz(strings, alg.layers, ref)
        h = self.h(0.0)
        groups, names = [], []
        for i in range(n):
            groups.append(h_part(h, lambda p, i=i: p.support == [i]))
            names.append(f"one_body{i}")
        for i, j in itertools.combinations(range(n), 2):
            g = h_part(h, lambda p, i=i, j=j: p.support == [i, j])
            if len(g):
                groups.append(g)
                names.append(f"pair{i}{j}")
        return va.hamiltonian_variational(groups, alg.layers, ref, names)


def h_part(h: PauliSum, keep) -> PauliSum:
    return PauliSum.from_terms(h.n_qubits, [(c, p) for c, p in h.terms if keep(p)])


def _sv_cap() -> int:
    from .statevector import DEFAULT_CAP

    return DEFAULT_CAP


def _require_simulable(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise RuntimeError(f"{n} qubits exceeds the {what} cap of {cap}")


# -- commands -------------------------------------------------------------------


class Outputs:
    """Artifacts collected in memory until the job succeeds."""

    def __init__(self):
        self.text: dict[str, str] = {}
        self.binary: dict[str, bytes] = {}

    def add(self, name: str, content: str) -> None:
        self.text[name] = content

    def add_bytes(self, name: str, content: bytes) -> None:
        self.binary[name] = content

    @property
    def names(self) -> list[str]:
        return sorted([*self.text, *self.binary, "results.json"])


def cmd_build(job: JobConfig, out: Outputs) -> dict:
    m = Model(job)
    if m.kind == "qed2p1":
        from .qed import TERMS

        parts = {name: f(m.p, m.layout) for name, f in TERMS.items()}
        h = m.h()
        out.add("hamiltonian.txt", h.to_text(SIG_DIGITS))
        return {
            "n_terms": len(h),
            "term_counts": {k: len(v) for k, v in parts.items()},
            "hermitian": h.is_hermitian(),
            "geometry": m.p.geometry.to_dict(),
            "layout": m.layout.to_dict(),
            "norm1": h.norm1(),
        }
    h = m.h(0.0)
    out.add("hamiltonian.txt", h.to_text(SIG_DIGITS))
    return {"n_terms": len(h), "hermitian": h.is_hermitian(), "norm1": h.norm1(),
            "time_dependent": m.time_dependent}


def cmd_spectrum(job: JobConfig, out: Outputs) -> dict:
    from .statevector import exact_eigensystem

    from .statevector import DENSE_CAP

    m = Model(job)
    _require_simulable(m.n_qubits, DENSE_CAP, "dense oracle")
    k = job.algorithm.k
    basis = m.sector_basis()
    pairs = exact_eigensystem(m.h(0.0), k, basis=basis)
    evals = [e for e, _ in pairs]
    out.add("spectrum.csv", _csv(["level", "energy"], [(i, e) for i, e in enumerate(evals)]))
    return {"k": k, "eigenvalues": evals, "sector": "gauss_zero" if basis is not None else "full",
            "sector_dim": None if basis is None else int(len(basis))}


def _oracle_states(m: Model, psi0, times):
    from .statevector import DENSE_CAP, Propagator

    if m.time_dependent or m.n_qubits > DENSE_CAP:
        return None
    prop = Propagator(m.h(0.0))
    return [prop.evolve(psi0, t) for t in times]


def cmd_trotter(job: JobConfig, out: Outputs) -> dict:
    from .statevector import DEFAULT_CAP, StateVector, apply, expectation, permute_qubits
    from .trotter import TrotterPlan, neutrino_swap_network, synthesize, synthesize_time_dependent

    m = Model(job)
    alg = job.algorithm
    n = alg.n_steps
    dt = alg.T / n
    plan = TrotterPlan(alg.order, n)

    def circuit(n_steps, t0):
        if m.kind == "neutrino" and m.n_qubits >= 2:
            return neutrino_swap_network(m.e, dt, alg.order, n_steps, t0)
        p = TrotterPlan(alg.order, n_steps)
        if m.time_dependent:
            return synthesize_time_dependent(m.h, n_steps * dt, p, t0)
        return synthesize(m.h(0.0), n_steps * dt, p)

    full = circuit(n, 0.0)
    counts = full.counts()
    out.add("circuit.txt", full.to_text())
    step_counts = circuit(1, 0.0).counts()
    out.add("counts.csv", _csv(["n_qubits", "n_steps", "order", "cnot_count", "cnot_depth", "total_gates"],
                               [(m.n_qubits, n, alg.order, counts.cnot_count, counts.cnot_depth, counts.total_gates)]))
    res = {"n_steps": n, "dt": dt, "order": alg.order, "plan": plan.term_order,
           "counts": counts.to_dict(), "counts_per_step": step_counts.to_dict()}
    if m.n_qubits > DEFAULT_CAP:
        res["simulated"] = False
        return res
    psi0 = StateVector.basis(m.n_qubits, m.reference())
    times = [k * dt for k in range(n + 1)]
    oracle = _oracle_states(m, psi0, times)
    rows = []
    psi = psi0
    for k in range(n + 1):
        if k > 0:
            c = circuit(1, (k - 1) * dt)
            psi = apply(c, psi)
            if c.output_permutation is not None:
                psi = permute_qubits(psi, c.output_permutation)
        if k % alg.record_every == 0 or k == n:
            fid = oracle[k].fidelity(psi) if oracle is not None else None
            rows.append((k, times[k], expectation(m.h(times[k]), psi), fid))
    out.add("trajectory.csv", _csv(["step", "time", "energy", "fidelity"], rows))
    if alg.save_state:
        out.add_bytes("state.bin", psi.amplitudes.astype("<c16").tobytes())
        out.add("state.json", json.dumps({"n_qubits": psi.n_qubits, "ordering": "qubit0-LSB",
                                          "dtype": "complex128", "endianness": "little"}, indent=2) + "\n")
    res.update(simulated=True, final_energy=rows[-1][2], final_fidelity=rows[-1][3])
    return res


def _initial(job: JobConfig, a) -> np.ndarray:
    rng = np.random.default_rng(job.algorithm.seed)
    return job.algorithm.init_scale * rng.standard_normal(a.n_params)


def _ground(m: Model) -> float | None:
    from .statevector import DENSE_CAP, exact_eigensystem

    if m.n_qubits > DENSE_CAP:
        return None
    return exact_eigensystem(m.h(0.0), 1, basis=m.sector_basis())[0][0]


def cmd_varqte(job: JobConfig, out: Outputs) -> dict:
    from .statevector import DENSE_CAP
    from .variational import varqte

    m = Model(job)
    _require_simulable(m.n_qubits, _sv_cap(), "statevector")
    if m.time_dependent:
        raise RuntimeError("varQTE runs use a time-independent Hamiltonian")
    alg = job.algorithm
    a = m.ansatz()
    theta0 = _initial(job, a)
    tr = varqte(a, theta0, m.h(0.0), alg.T, alg.dt, alg.reg, alg.integrator,
                oracle=m.n_qubits <= DENSE_CAP, record_every=alg.record_every)
    out.add("trajectory.csv", tr.to_csv())
    fids = [f for f in tr.fidelities if f is not None]
    return {"n_params": a.n_params, "family": a.family, "steps": len(tr.times) - 1,
            "final_energy": tr.energies[-1], "final_fidelity": fids[-1] if fids else None,
            "min_fidelity": min(fids) if fids else None, "theta": tr.thetas[-1]}


def cmd_varqite(job: JobConfig, out: Outputs) -> dict:
    from .variational import varqite

    m = Model(job)
    _require_simulable(m.n_qubits, _sv_cap(), "statevector")
    alg = job.algorithm
    a = m.ansatz()
    theta0 = _initial(job, a)
    tr = varqite(a, theta0, m.h(0.0), alg.beta_max, alg.dtau, alg.reg, alg.integrator)
    out.add("trajectory.csv", tr.to_csv())
    e = np.asarray(tr.energies)
    exact = _ground(m)
    return {"n_params": a.n_params, "family": a.family, "steps": len(tr.times) - 1,
            "final_tau": tr.times[-1], "final_energy": tr.energies[-1], "exact_ground": exact,
            "error": None if exact is None else tr.energies[-1] - exact,
            "monotone": bool(np.all(np.diff(e) <= 1e-8)), "theta": tr.thetas[-1]}


def _opt(job: JobConfig):
    from .variational import OptConfig

    alg = job.algorithm
    return OptConfig(seed=alg.seed, max_iter=alg.max_iter, init_scale=alg.init_scale, method=alg.optimizer)


def cmd_vqe(job: JobConfig, out: Outputs) -> dict:
    from .variational import vqe

    m = Model(job)
    _require_simulable(m.n_qubits, _sv_cap(), "statevector")
    a = m.ansatz()
    r = vqe(a, m.h(0.0), _opt(job))
    out.add("trajectory.csv", _csv(["step", "energy"], list(enumerate(r.trace))))
    exact = _ground(m)
    return {"n_params": a.n_params, "family": a.family, "energy": r.energy, "exact_ground": exact,
            "error": None if exact is None else r.energy - exact, "converged": r.converged,
            "iterations": r.n_iter, "theta": r.theta}


def cmd_vqd(job: JobConfig, out: Outputs) -> dict:
    from .statevector import DENSE_CAP, exact_eigensystem
    from .variational import vqd

    m = Model(job)
    _require_simulable(m.n_qubits, _sv_cap(), "statevector")
    alg = job.algorithm
    a = m.ansatz()
    levels = vqd(a, m.h(0.0), alg.k, alg.beta, _opt(job), alg.restarts)
    exact = None
    if m.n_qubits <= DENSE_CAP:
        exact = [e for e, _ in exact_eigensystem(m.h(0.0), alg.k, basis=m.sector_basis())]
    out.add("levels.csv", _csv(["level", "energy", "penalized", "max_overlap"],
                               [(j, lv.energy, lv.penalized, max(lv.overlaps, default=0.0))
                                for j, lv in enumerate(levels)]))
    return {"n_params": a.n_params, "energies": [lv.energy for lv in levels], "exact": exact,
            "overlaps": [lv.overlaps for lv in levels], "converged": [lv.converged for lv in levels]}


def cmd_neutrino_gates(job: JobConfig, out: Outputs) -> dict:
    from .neutrino import make_ensemble
    from .trotter import neutrino_count_formula, neutrino_swap_network

    alg = job.algorithm
    n0 = job.neutrino.N
    lo = alg.N_min if alg.N_min is not None else n0
    hi = alg.N_max if alg.N_max is not None else max(lo, n0)
    if lo < 2 or hi < lo:
        raise RuntimeError(f"invalid neutrino range {lo}..{hi} (need 2 <= N_min <= N_max)")
    rows, table = [], []
    for n in range(lo, hi + 1):
        e = neutrino_ensemble(job.neutrino.model_copy(update={"N": n, "energies": None, "momenta": None})) \
            if n != n0 else neutrino_ensemble(job.neutrino)
        c = neutrino_swap_network(e, alg.T / alg.n_steps, alg.order, 1).counts()
        fc, fd = neutrino_count_formula(n, alg.order)
        rows.append((n, c.cnot_count, c.cnot_depth))
        table.append({"N": n, "cnot_count": c.cnot_count, "cnot_depth": c.cnot_depth,
                      "formula_count": fc, "formula_depth": fd,
                      "matches": c.cnot_count == fc and c.cnot_depth == fd})
    out.add("counts.csv", _csv(["N", "cnot_count", "cnot_depth"], rows))
    return {"order": alg.order, "per_step": True, "rows": table}


def cmd_resources(job: JobConfig, out: Outputs) -> dict:
    from . import resources as rs

    alg = job.algorithm
    scheme = alg.resource_scheme
    fits = [rs.empirical_counts(rs.BUILDERS[t], alg.l_values, scheme, t) for t in ("electric", "single_u")]
    plaq = rs.empirical_counts(rs.BUILDERS["plaquette"], alg.plaquette_l_values, scheme, "plaquette",
                               min_points=min(4, len(alg.plaquette_l_values)))
    report = rs.ScalingReport([*fits, plaq])
    dom = rs.plaquette_dominance(alg.plaquette_l_values, scheme)
    out.add("counts.csv", report.to_csv())
    res: dict[str, Any] = {
        "scheme": scheme,
        "fits": {r.term: {"exponent": r.exponent, "ci": r.ci, "expected": r.scaling.power("d_S"),
                          "n_points": r.n_points} for r in report.rows},
        "plaquette_dominates": dom.holds,
        "table_i": [c.to_dict() for c in rs.table_i_comparison()],
    }
    if job.model == "qed2p1":
        p = qed_params(job.qed)
        rp = rs.ResourceParams.from_geometry(p.geometry, p.truncation)
        res["qubit_budget"] = rs.qubit_budget(p.geometry, p.truncation)
        res["scaling_table"] = {r.term: {"class": r.scaling.label(), "value": r.value}
                                for r in rs.scaling_table(rp).rows}
    elif job.model == "neutrino":
        res["qubit_budget"] = rs.neutrino_qubit_budget(job.neutrino.N)
    return res


HANDLERS = {
    "build": cmd_build,
    "spectrum": cmd_spectrum,
    "evolve-trotter": cmd_trotter,
    "evolve-varqte": cmd_varqte,
    "evolve-varqite": cmd_varqite,
    "vqe": cmd_vqe,
    "vqd": cmd_vqd,
    "neutrino-gates": cmd_neutrino_gates,
    "resources": cmd_resources,
}


def _n_qubits(job: JobConfig) -> int | None:
    if job.model == "qed2p1":
        from .resources import qubit_budget

        p = qed_params(job.qed)
        return qubit_budget(p.geometry, p.truncation)
    if job.model == "neutrino":
        return job.neutrino.N
    return None


def execute(job: JobConfig) -> tuple[dict, Outputs]:
    """Run a validated job; returns the results document and pending artifacts."""
    out = Outputs()
    res = HANDLERS[job.command](job, out)
    doc = {
        "schema_version": 1,
        "command": job.command,
        "model": job.model,
        "status": "ok",
        "backend": kernels.BACKEND,
        "config": job.model_dump(mode="json", exclude={"output"}),
        "n_qubits": _n_qubits(job),
        "results": res,
        "artifacts": out.names,
    }
    doc = _clean(doc)
    jsonschema.validate(doc, results_schema())
    return doc, out


def write_outputs(directory: Path, doc: dict, out: Outputs) -> list[Path]:
    created_dir = not directory.exists()
    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for name, text in sorted(out.text.items()):
            path = directory / name
            path.write_text(text, encoding="utf-8", newline="\n")
            written.append(path)
        for name, data in sorted(out.binary.items()):
            path = directory / name
            path.write_bytes(data)
            written.append(path)
        path = directory / "results.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
        written.append(path)
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        if created_dir and not any(directory.iterdir()):
            directory.rmdir()
        raise
    return written


def run(job: JobConfig) -> list[Path]:
    doc, out = execute(job)
    return write_outputs(Path(job.output), doc, out)


# -- explain --------------------------------------------------------------------


def explain(job: JobConfig) -> str:
    """Read-only plan: qubits, Pauli terms, gate estimates, oracle feasibility."""
    from .statevector import DEFAULT_CAP, DENSE_CAP

    lines = [f"command: {job.command}"]
    n = _n_qubits(job)
    if job.model is None:
        lines.append("model: none (resource tables only)")
        return "\n".join(lines) + "\n"
    dense = "feasible" if n <= DENSE_CAP else "infeasible"
    sv = "feasible" if n <= DEFAULT_CAP else "infeasible at default cap"
    lines.append(f"model: {job.model}")
    lines.append(f"{n} qubits; dense oracle: {dense}; statevector: {sv}")
    if job.model == "qed2p1":
        lines += _explain_qed(job, n)
    else:
        lines += _explain_neutrino(job)
    return "\n".join(lines) + "\n"


def _explain_qed(job: JobConfig, n: int) -> list[str]:
    from . import resources as rs
    from .qed import TERMS

    p = qed_params(job.qed)
    geo = p.geometry
    out = [f"lattice {job.qed.Lx}x{job.qed.Ly} {job.qed.boundary}: {geo.n_sites} sites, "
           f"{geo.n_links} links, {geo.n_plaquettes} plaquettes; d_S = {p.truncation.d_S}, "
           f"{p.truncation.qubits_per_link} qubits per link ({p.truncation.scheme.value})"]
    if n <= 64:
        lay = p.layout()
        total = PauliSum.zero(lay.total_qubits)
        for name, f in TERMS.items():
            part = f(p, lay)
            total = total + part
            out.append(f"  {name}: {len(part)} Pauli strings")
        h = total.simplify()
        out.append(f"  total: {len(h)} Pauli strings")
        cnots = sum(2 * (q.weight - 1) for _, q in h.terms if q.weight > 1)
        steps = job.algorithm.n_steps
        per = cnots if job.algorithm.order == 1 else 2 * cnots
        out.append(f"predicted Trotter CNOTs (ladder synthesis, upper bound): {per} per step, {per * steps} for {steps} steps")
    else:
        t = p.truncation
        plaq = len(rs.plaquette_term(t)) if t.d_S <= 7 else None
        est = "n/a" if plaq is None else f"~{plaq * geo.n_plaquettes}"
        out.append(f"  plaquette term estimate: {est} Pauli strings (per-plaquette count x plaquettes)")
    return out


def _explain_neutrino(job: JobConfig) -> list[str]:
    from .trotter import neutrino_count_formula, neutrino_swap_network

    e = neutrino_ensemble(job.neutrino)
    n = e.N
    pairs = n * (n - 1) // 2
    out = [f"{n} neutrinos: {2 * n} one-body and {3 * pairs} two-body Pauli strings"]
    if n >= 2:
        alg = job.algorithm
        c = neutrino_swap_network(e, alg.T / alg.n_steps, alg.order, 1).counts()
        fc, fd = neutrino_count_formula(n, alg.order)
        out.append(f"SWAP network, order {alg.order}: {c.cnot_count} CNOTs, depth {c.cnot_depth} per step "
                   f"(closed form {fc:g} / {fd:g})")
    return out


# -- entry point ----------------------------------------------------------------


def _threads():
    raw = os.environ.get("LGT_FORGE_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"LGT_FORGE_THREADS must be a positive integer (got {raw!r})")
    if n < 1:
        raise ConfigError(f"LGT_FORGE_THREADS must be a positive integer (got {raw!r})")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lgt-forge", description="Lattice gauge theory and neutrino simulation jobs.")
    sub = ap.add_subparsers(dest="action", required=True)
    for name, helptext in (("run", "execute a job"), ("explain", "print the plan of a job without running it")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON job file")
        p.add_argument("--output", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="seed override")
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0].startswith("--") and argv[0] not in ("-h", "--help"):
        argv.insert(0, "run")
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        job = load_config(args.config, args.output, args.seed)
        limiter = _threads()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.action == "explain":
            sys.stdout.write(explain(job))
            return 0
        paths = run(job)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: report and exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    finally:
        if limiter is not None:
            limiter.restore_original_limits()
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
