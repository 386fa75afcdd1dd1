"""Dense-matrix reference for small systems (n <= 10).

Matrices use the Kronecker order ``P_0 (x) P_1 (x) ... (x) P_{n-1}``, so
qubit 0 is the most significant bit of a row index.  Nothing here touches
the packed-integer kernels: strings are read letter by letter and turned
into explicit 2x2 matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import ResourceLimitError
from .pauli import LETTERS, PauliString, decode
from .propagation import Circuit, Layer, PauliSum
from .states import ProductState

__all__ = [
    "MAX_QUBITS",
    "PAULI_MATRICES",
    "DenseOperator",
    "pauli_matrix",
    "densify",
    "pauli_coefficients",
    "from_pauli_coefficients",
    "conjugate_adjoint",
    "evolve_layers",
    "exact_expectation",
    "layer_expectations",
    "dense_state",
]

MAX_QUBITS = 10

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_BASIS = np.stack([PAULI_MATRICES[c] for c in LETTERS])


def _check_n(n: int) -> None:
    if n > MAX_QUBITS:
        raise ResourceLimitError(f"dense oracle limited to {MAX_QUBITS} qubits, got {n}")


@dataclass
class DenseOperator:
    matrix: np.ndarray
    n_qubits: int

    def __post_init__(self):
        dim = 2 ** self.n_qubits
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got {self.matrix.shape}")

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=atol, rtol=0))


def pauli_matrix(p: PauliString) -> np.ndarray:
    _check_n(p.n_qubits)
    return reduce(np.kron, [PAULI_MATRICES[c] for c in decode(p)])


def densify(psum: PauliSum) -> DenseOperator:
    """Sum of ``c_P`` times the Kronecker product of each term's factors."""
    n = psum.n_qubits
    _check_n(n)
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for p, c in psum.items():
        out += c * pauli_matrix(p)
    return DenseOperator(out, n)


def _apply_each_axis(t: np.ndarray, mat: np.ndarray) -> np.ndarray:
    for q in range(t.ndim):
        t = np.moveaxis(np.tensordot(mat, t, axes=([1], [q])), 0, q)
    return t


def pauli_coefficients(op: DenseOperator) -> np.ndarray:
    """Tensor ``C[a_0, ..., a_{n-1}] = tr(P_a op) / 2**n`` (``a`` indexes I, X, Y, Z)."""
    n = op.n_qubits
    _check_n(n)
    pairs = [k for q in range(n) for k in (q, n + q)]
    t = op.matrix.reshape((2,) * (2 * n)).transpose(pairs).reshape((4,) * n)
    # per qubit: tr(P_a m) / 2 = sum_rc P_a[c, r] m[r, c] / 2
    return _apply_each_axis(t, _BASIS.transpose(0, 2, 1).reshape(4, 4) / 2)


def from_pauli_coefficients(coeffs: np.ndarray) -> DenseOperator:
    """Inverse of :func:`pauli_coefficients`."""
    n = coeffs.ndim
    _check_n(n)
    t = _apply_each_axis(coeffs.astype(complex), _BASIS.reshape(4, 4).T)
    unpair = [2 * q for q in range(n)] + [2 * q + 1 for q in range(n)]
    dim = 2 ** n
    return DenseOperator(t.reshape((2,) * (2 * n)).transpose(unpair).reshape(dim, dim), n)


def _weights(n: int) -> np.ndarray:
    grids = np.indices((4,) * n)
    return (grids != 0).sum(axis=0)


def _damp(op: DenseOperator, gamma: float) -> DenseOperator:
    coeffs = pauli_coefficients(op)
    return from_pauli_coefficients(coeffs * np.exp(-gamma * _weights(op.n_qubits)))


class _Monomial:
    """A Pauli matrix as a permutation with phases: ``P[r, col[r]] = val[r]``."""

    def __init__(self, matrix: np.ndarray):
        self.col = np.argmax(np.abs(matrix), axis=1)
        self.val = matrix[np.arange(len(matrix)), self.col]
        self.row = np.argmax(np.abs(matrix), axis=0)
        self.val_t = matrix[self.row, np.arange(len(matrix))]

    def left(self, m):
        return self.val[:, None] * m[self.col, :]

    def right(self, m):
        return m[:, self.row] * self.val_t[None, :]


def _conjugate_gate(m: np.ndarray, p: PauliString, angle: float, cache: dict) -> np.ndarray:
    # U = cos(a/2) I - i sin(a/2) P
    # U^dag m U = c^2 m + i c s (P m - m P) + s^2 P m P
    mono = cache.get(p.bits)
    if mono is None:
        mono = cache[p.bits] = _Monomial(pauli_matrix(p))
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    pm = mono.left(m)
    mp = mono.right(m)
    pmp = mono.right(pm)
    return c * c * m + 1j * c * s * (pm - mp) + s * s * pmp


def _conjugate_layer(op: DenseOperator, layer: Layer, cache: dict) -> DenseOperator:
    m = op.matrix
    for gate in reversed(layer.gates):
        m = _conjugate_gate(m, gate.generator, gate.angle, cache)
    out = DenseOperator(m, op.n_qubits)
    if layer.noise is not None and layer.noise.gamma > 0:
        out = _damp(out, layer.noise.gamma)
    return out


def evolve_layers(op: DenseOperator, circuit: Circuit):
    """Yield the operator after each layer, in the same order as propagation."""
    _check_n(op.n_qubits)
    if circuit.n_qubits != op.n_qubits:
        raise ValueError(f"circuit has {circuit.n_qubits} qubits, operator {op.n_qubits}")
    cache: dict = {}
    for layer in reversed(circuit.layers):
        op = _conjugate_layer(op, layer, cache)
        yield op


def conjugate_adjoint(op: DenseOperator, circuit: Circuit) -> DenseOperator:
    """``U^dag op U`` with noise layers applied as coefficient damping."""
    for op in evolve_layers(op, circuit):
        pass
    return op


def dense_state(state: ProductState) -> np.ndarray:
    _check_n(state.n_qubits)
    return reduce(np.kron, list(state.density_matrices()))


def exact_expectation(op: DenseOperator, state: ProductState, rho: np.ndarray | None = None) -> float:
    if state.n_qubits != op.n_qubits:
        raise ValueError(f"state has {state.n_qubits} qubits, operator {op.n_qubits}")
    if rho is None:
        rho = dense_state(state)
    value = np.einsum("ij,ji->", rho, op.matrix)
    if abs(value.imag) > 1e-10:
        raise AssertionError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def layer_expectations(observable: PauliSum, circuit: Circuit, state: ProductState) -> list[float]:
    """Exact expectation before any layer and after each one."""
    rho = dense_state(state)
    op = densify(observable)
    out = [exact_expectation(op, state, rho)]
    for op in evolve_layers(op, circuit):
        out.append(exact_expectation(op, state, rho))
    return out
