"""Independent dense-matrix helpers for tests (no package kernels)."""

import itertools
from functools import reduce

import numpy as np

MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense(label: str) -> np.ndarray:
    return reduce(np.kron, [MATS[c] for c in label])


def labels(n: int):
    return ["".join(t) for t in itertools.product("IXYZ", repeat=n)]
