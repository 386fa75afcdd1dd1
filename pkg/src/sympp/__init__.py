"""Pauli propagation with merging of symmetry-equivalent Pauli strings."""

from .errors import ResourceLimitError
from .models import (
    IsingParams,
    XXZParams,
    build_ising_circuit,
    build_xxz_circuit,
    mid_chain_z,
    random_circuit,
    random_symmetric_circuit,
    spin_squared_plus,
    total_spin_squared,
)
from .pauli import PauliString, PhasedPauli, apply_permutation, commutes, decode, encode, product, weight
from .propagation import (
    Circuit,
    Layer,
    MergePolicy,
    NoiseLayer,
    PauliRotationGate,
    PauliSum,
    PropagationConfig,
    PropagationTrace,
    apply_gate_adjoint,
    apply_noise,
    expectation,
    merge_by_symmetry,
    propagate,
    truncate,
)
from .states import ProductState, overlap
from .symmetry import SymmetryGroup, canonical_rep, count_representatives, orbit

__version__ = "0.1.0"
