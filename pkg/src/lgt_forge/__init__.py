"""Pauli-sum compiler and statevector simulator for lattice QED and collective neutrinos."""
from .kernels import BACKEND
from .pauli import PauliString, PauliSum, decompose, simplify
from .lattice import Boundary, Geometry, LatticeSpec, build_geometry
from .encoding import LinkTruncation, QubitLayout, Scheme, build_layout, jw_op
from .qed import QEDParams, gauss_operator, h_electric, h_kinetic, h_magnetic, h_mass, h_total
from .neutrino import NeutrinoEnsemble, Profile, build_h, survival_probability_oracle
from .circuit import Circuit, Gate, GateCounts
from .statevector import StateVector, apply, exact_eigensystem, exact_evolve, exact_unitary, expectation
from .trotter import TrotterPlan, error_bound, neutrino_swap_network, optimal_steps, synthesize
from .variational import (
    Ansatz,
    OptConfig,
    assemble_mclachlan,
    energy,
    gradient,
    varqite,
    varqte,
    vqd,
    vqe,
)
from .resources import ResourceParams, empirical_counts, qubit_budget, scaling_table

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "PauliString", "PauliSum", "decompose", "simplify",
    "Boundary", "Geometry", "LatticeSpec", "build_geometry",
    "LinkTruncation", "QubitLayout", "Scheme", "build_layout", "jw_op",
    "QEDParams", "gauss_operator", "h_electric", "h_kinetic", "h_magnetic", "h_mass", "h_total",
    "NeutrinoEnsemble", "Profile", "build_h", "survival_probability_oracle",
    "Circuit", "Gate", "GateCounts",
    "StateVector", "apply", "exact_eigensystem", "exact_evolve", "exact_unitary", "expectation",
    "TrotterPlan", "error_bound", "neutrino_swap_network", "optimal_steps", "synthesize",
    "Ansatz", "OptConfig", "assemble_mclachlan", "energy", "gradient", "varqite", "varqte", "vqd", "vqe",
    "ResourceParams", "empirical_counts", "qubit_budget", "scaling_table",
]
