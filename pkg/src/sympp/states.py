"""Product states and their overlaps with Pauli strings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliString, codes_at

__all__ = ["ProductState", "overlap", "overlap_keys"]

_NAMED = {
    "plus_x": (1.0, 0.0, 0.0),
    "minus_x": (-1.0, 0.0, 0.0),
    "plus_y": (0.0, 1.0, 0.0),
    "zero_z": (0.0, 0.0, 1.0),
    "one_z": (0.0, 0.0, -1.0),
}


@dataclass(frozen=True, eq=False)
class ProductState:
    """Single-qubit Bloch vectors, one row per qubit.

    ``tr(rho_q P)`` is 1 for ``I`` and the matching Bloch component for
    ``X``, ``Y``, ``Z``.
    """

    bloch: np.ndarray

    def __post_init__(self):
        b = np.array(self.bloch, dtype=float)
        if b.ndim != 2 or b.shape[1] != 3 or len(b) == 0:
            raise ValueError(f"bloch vectors must have shape (n, 3), got {b.shape}")
        norms = np.linalg.norm(b, axis=1)
        if np.any(norms > 1 + 1e-12):
            raise ValueError(f"Bloch vector norm exceeds 1 on qubits {np.flatnonzero(norms > 1 + 1e-12)}")
        b.setflags(write=False)
        object.__setattr__(self, "bloch", b)

    @classmethod
    def uniform(cls, n_qubits: int, vector) -> "ProductState":
        return cls(np.tile(np.asarray(vector, dtype=float), (n_qubits, 1)))

    @classmethod
    def named(cls, n_qubits: int, kind: str) -> "ProductState":
        try:
            return cls.uniform(n_qubits, _NAMED[kind])
        except KeyError:
            raise ValueError(f"unknown state kind {kind!r}; choose from {sorted(_NAMED)}") from None

    @classmethod
    def plus(cls, n_qubits: int) -> "ProductState":
        return cls.named(n_qubits, "plus_x")

    @classmethod
    def zero(cls, n_qubits: int) -> "ProductState":
        return cls.named(n_qubits, "zero_z")

    @property
    def n_qubits(self) -> int:
        return len(self.bloch)

    def density_matrices(self) -> np.ndarray:
        """``(n, 2, 2)`` array of single-qubit density matrices."""
        x, y, z = self.bloch.T
        rho = np.empty((self.n_qubits, 2, 2), dtype=complex)
        rho[:, 0, 0] = (1 + z) / 2
        rho[:, 1, 1] = (1 - z) / 2
        rho[:, 0, 1] = (x - 1j * y) / 2
        rho[:, 1, 0] = (x + 1j * y) / 2
        return rho


def _tables(state: ProductState) -> np.ndarray:
    return np.hstack([np.ones((state.n_qubits, 1)), state.bloch])


def overlap_keys(state: ProductState, keys: np.ndarray) -> np.ndarray:
    out = np.ones(len(keys))
    for q, table in enumerate(_tables(state)):
        out *= table[codes_at(keys, q)]
    return out


def overlap(state: ProductState, p: PauliString) -> float:
    if p.n_qubits != state.n_qubits:
        raise ValueError(f"qubit-count mismatch: state {state.n_qubits}, string {p.n_qubits}")
    out = 1.0
    for q, table in enumerate(_tables(state)):
        out *= table[p.code(q)]
    return float(out)
