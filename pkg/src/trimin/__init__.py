"""Matrix-free exact diagonalization and two-site entanglement of the
transverse-field Ising model on triangular-lattice patches."""

from .lattice import Lattice, build_patch, nearest_pairs, center_pair
from .hamiltonian import HamiltonianOperator, build_operator
from .tracemin import SolverConfig, EigenResult, solve
from .rdm import ReducedDensityMatrix, reduced_density_matrix
from .entanglement import concurrence_general, concurrence_x_state, entanglement_of_formation

__version__ = "0.1.0"

__all__ = [
    "Lattice", "build_patch", "nearest_pairs", "center_pair",
    "HamiltonianOperator", "build_operator",
    "SolverConfig", "EigenResult", "solve",
    "ReducedDensityMatrix", "reduced_density_matrix",
    "concurrence_general", "concurrence_x_state", "entanglement_of_formation",
]
