"""Circuit builders for the benchmark spin models and their observables.

Angles follow the propagation convention ``gate(P, theta) = exp(-i theta/2 P)``.
A Trotter factor ``exp(-i dt * J * P)`` for a Hamiltonian term ``J * P``
becomes the gate ``(P, 2 * dt * J)``.  Both models carry an overall minus
sign in the Hamiltonian, so their angles are negative for positive
couplings.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .pauli import LETTERS, PauliString, apply_permutation, commutes
from .propagation import Circuit, Layer, NoiseLayer, PauliRotationGate, PauliSum
from .states import ProductState, overlap
from .symmetry import SymmetryGroup

__all__ = [
    "IsingParams",
    "XXZParams",
    "ProductState",
    "overlap",
    "ring_edges",
    "mid_chain_site",
    "mid_chain_z",
    "build_ising_circuit",
    "torus_distance",
    "xxz_pairs",
    "build_xxz_circuit",
    "total_spin_squared",
    "spin_squared_plus",
    "random_circuit",
    "random_symmetric_circuit",
]


@dataclass(frozen=True)
class IsingParams:
    """Tilted-field Ising chain ``H = -sum ZZ - h_z sum Z - h_x sum X``."""

    n: int
    h_x: float = 1.4
    h_z: float = 0.9045
    delta_t: float = 0.25
    layers: int = 1
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"Ising chain needs n >= 3, got {self.n}")
        if not self.delta_t > 0:
            raise ValueError(f"delta_t must be positive, got {self.delta_t}")
        if self.layers < 0:
            raise ValueError(f"layers must be non-negative, got {self.layers}")
        if self.boundary not in ("periodic", "open"):
            raise ValueError(f"boundary must be 'periodic' or 'open', got {self.boundary!r}")


@dataclass(frozen=True)
class XXZParams:
    """Power-law XXZ model on an ``lx`` x ``ly`` torus.

    ``H = -j_perp sum_{i<j} (XX + YY + (delta + 1) ZZ) / d_ij**alpha`` with
    ``d_ij`` the minimal-image distance.
    """

    lx: int
    ly: int
    j_perp: float = 1.0
    delta: float = -1.8
    alpha: float = 3.0
    delta_t: float = 0.05
    layers: int = 1

    def __post_init__(self):
        if self.lx < 1 or self.ly < 1:
            raise ValueError(f"lattice dimensions must be positive, got {self.lx}x{self.ly}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if not self.delta_t > 0:
            raise ValueError(f"delta_t must be positive, got {self.delta_t}")
        if self.layers < 0:
            raise ValueError(f"layers must be non-negative, got {self.layers}")

    @property
    def n(self) -> int:
        return self.lx * self.ly


def ring_edges(n: int, periodic: bool = True) -> list[tuple[int, int]]:
    edges = [(i, i + 1) for i in range(n - 1)]
    if periodic:
        edges.append((n - 1, 0))
    return edges


def mid_chain_site(n: int) -> int:
    """0-based index of site ``ceil(n/2)`` in 1-based numbering."""
    return math.ceil(n / 2) - 1


def mid_chain_z(n: int) -> PauliSum:
    return PauliSum.single(PauliString.single(n, mid_chain_site(n), "Z"))


def build_ising_circuit(p: IsingParams) -> Circuit:
    """``layers`` copies of: ZZ on every edge, then Z on every site, then X.

    Each sublayer consists of mutually commuting gates, so the layer is
    exactly invariant under cyclic shifts (and reflections) of a periodic
    chain.
    """
    n, dt = p.n, p.delta_t
    zz = [PauliRotationGate(PauliString.from_sites(n, {i: "Z", j: "Z"}), -2 * dt)
          for i, j in ring_edges(n, p.boundary == "periodic")]
    z = [PauliRotationGate(PauliString.single(n, i, "Z"), -2 * dt * p.h_z) for i in range(n)]
    x = [PauliRotationGate(PauliString.single(n, i, "X"), -2 * dt * p.h_x) for i in range(n)]
    layer = Layer(zz + z + x)
    return Circuit(n, [layer] * p.layers)


def torus_distance(i: int, j: int, lx: int, ly: int) -> float:
    xi, yi = i % lx, i // lx
    xj, yj = j % lx, j // lx
    dx = abs(xi - xj)
    dy = abs(yi - yj)
    dx = min(dx, lx - dx)
    dy = min(dy, ly - dy)
    return math.hypot(dx, dy)


def xxz_pairs(p: XXZParams) -> list[tuple[int, int, float]]:
    """``(i, j, d_ij)`` for every ``i < j`` in lexicographic order."""
    out = []
    for i, j in itertools.combinations(range(p.n), 2):
        d = torus_distance(i, j, p.lx, p.ly)
        if d == 0:
            raise ValueError(
                f"sites {i} and {j} coincide under the minimal-image convention "
                f"on a {p.lx}x{p.ly} torus"
            )
        out.append((i, j, d))
    return out


def build_xxz_circuit(p: XXZParams, ordering: str = "sublayer") -> Circuit:
    """Trotterised power-law XXZ evolution.

    ``ordering="sublayer"`` (default) applies every XX gate, then every YY
    gate, then every ZZ gate, pairs in lexicographic order within each
    sublayer.  Gates inside a sublayer commute, so each layer is exactly
    invariant under both lattice translations.  ``ordering="pairwise"``
    applies XX, YY, ZZ for one pair before moving to the next; that product
    depends on pair order and is only symmetric up to Trotter error.
    """
    n, dt, J = p.n, p.delta_t, p.j_perp
    pairs = xxz_pairs(p)
    scale = {"X": 1.0, "Y": 1.0, "Z": p.delta + 1.0}

    def gate(i, j, d, letter):
        angle = -2 * dt * J * scale[letter] / d ** p.alpha
        return PauliRotationGate(PauliString.from_sites(n, {i: letter, j: letter}), angle)

    if ordering == "sublayer":
        gates = [gate(i, j, d, c) for c in "XYZ" for i, j, d in pairs]
    elif ordering == "pairwise":
        gates = [gate(i, j, d, c) for i, j, d in pairs for c in "XYZ"]
    else:
        raise ValueError(f"unknown ordering {ordering!r}")
    return Circuit(n, [Layer(gates)] * p.layers)


def total_spin_squared(n: int) -> PauliSum:
    """``S^2 = (3n/4) I + (1/2) sum_{i<j} (X_i X_j + Y_i Y_j + Z_i Z_j)``."""
    if n < 1:
        raise ValueError("n must be positive")
    terms = [(PauliString.identity(n), 0.75 * n)]
    for i, j in itertools.combinations(range(n), 2):
        for c in "XYZ":
            terms.append((PauliString.from_sites(n, {i: c, j: c}), 0.5))
    return PauliSum.from_terms(n, terms)


def spin_squared_plus(n: int) -> float:
    """``<+|S^2|+>`` for ``n`` spins: maximal total spin ``n/2``."""
    return n * (n + 2) / 4


# ---------------------------------------------------------------------------
# random circuits for testing


def _random_pauli(n: int, rng: np.random.Generator, max_weight: int) -> PauliString:
    w = int(rng.integers(1, max_weight + 1))
    sites = rng.choice(n, size=w, replace=False)
    letters = rng.integers(1, 4, size=w)
    return PauliString.from_sites(n, {int(q): LETTERS[c] for q, c in zip(sites, letters)})


def random_circuit(n: int, n_gates: int, rng: np.random.Generator, max_weight: int = 3,
                   layers: int = 1) -> Circuit:
    """Random Pauli rotations split evenly over ``layers``."""
    gates = [PauliRotationGate(_random_pauli(n, rng, min(max_weight, n)),
                               float(rng.uniform(-np.pi, np.pi))) for _ in range(n_gates)]
    per = max(1, math.ceil(n_gates / max(layers, 1)))
    return Circuit(n, [Layer(gates[k:k + per]) for k in range(0, n_gates, per)])


def _orbit_strings(group: SymmetryGroup, p: PauliString) -> list[PauliString]:
    if group.kind == "permutation_full":
        perms = itertools.permutations(range(p.n_qubits))
    else:
        perms = group.elements
    return sorted({apply_permutation(p, g) for g in perms})


def random_symmetric_circuit(group: SymmetryGroup, n_layers: int, rng: np.random.Generator,
                             orbits_per_layer: int = 2, max_weight: int = 2,
                             gamma: float = 0.0, max_tries: int = 200) -> Circuit:
    """Layers that commute with every element of ``group``.

    Each layer is built from whole gate orbits: a random generator, all its
    images under the group, one shared angle.  Generators whose images do not
    commute among themselves are rejected, because then the product would
    depend on the order and would not be symmetric.
    """
    n = group.n_qubits
    noise = NoiseLayer(gamma) if gamma > 0 else None
    layers = []
    for _ in range(n_layers):
        gates = []
        for _ in range(orbits_per_layer):
            for _ in range(max_tries):
                images = _orbit_strings(group, _random_pauli(n, rng, min(max_weight, n)))
                if all(commutes(a, b) for a, b in itertools.combinations(images, 2)):
                    break
            else:
                raise RuntimeError("could not draw a generator with a commuting orbit")
            angle = float(rng.uniform(-np.pi, np.pi))
            gates.extend(PauliRotationGate(q, angle) for q in images)
        layers.append(Layer(gates, noise))
    return Circuit(n, layers)
