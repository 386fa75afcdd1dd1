"""Bit-packed Pauli strings.

Each qubit takes two bits, qubit 0 in the least-significant pair::

    I -> 00, X -> 01, Y -> 10, Z -> 11

so the packed value of a string is its base-4 numeral with qubit 0 as the
lowest digit.  Text rendering puts qubit 0 leftmost, e.g. ``"XII"`` has
``bits == 1``.

The code table is a group isomorphism between {I, X, Y, Z} modulo phase and
Z2 x Z2 under XOR, so the Pauli part of a product is ``p ^ q``.  Phases are
tracked separately as an exponent of ``i``.

Besides the scalar :class:`PauliString` API, this module holds the
vectorised kernels (``*_keys`` functions) that operate on whole arrays of
packed keys.  Keys are ``uint64`` for up to 32 qubits and Python ints in an
``object`` array for 33-64 qubits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "LETTERS",
    "MAX_QUBITS",
    "PauliString",
    "PhasedPauli",
    "encode",
    "decode",
    "weight",
    "commutes",
    "product",
    "apply_permutation",
    "key_dtype",
    "as_keys",
]

LETTERS = "IXYZ"
MAX_QUBITS = 64
_CODE = {letter: code for code, letter in enumerate(LETTERS)}

# ordered pairs (a, b) with a*b = +i c: XY=iZ, YZ=iX, ZX=iY
_PLUS_I = {(1, 2), (2, 3), (3, 1)}


def _check_n(n_qubits: int) -> None:
    if not isinstance(n_qubits, (int, np.integer)) or n_qubits < 1:
        raise ValueError(f"n_qubits must be a positive integer, got {n_qubits!r}")
    if n_qubits > MAX_QUBITS:
        raise ValueError(f"at most {MAX_QUBITS} qubits are supported, got {n_qubits}")


@dataclass(frozen=True, order=True)
class PauliString:
    """An unsigned n-qubit Pauli operator in the 2-bit packed layout.

    Ordering compares ``bits`` first, which is the integer order used for
    canonical representatives.
    """

    bits: int
    n_qubits: int

    def __post_init__(self):
        _check_n(self.n_qubits)
        bits = int(self.bits)
        if bits < 0 or bits >> (2 * self.n_qubits):
            raise ValueError(
                f"bits {bits:#x} do not fit in {self.n_qubits} qubits"
            )
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse ``"XYZI"``-style text (qubit 0 leftmost)."""
        return encode(label.strip().upper())

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(0, n_qubits)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> "PauliString":
        if not 0 <= qubit < n_qubits:
            raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
        return cls(_CODE[letter] << (2 * qubit), n_qubits)

    @classmethod
    def from_sites(cls, n_qubits: int, sites: dict[int, str]) -> "PauliString":
        """Build from a sparse ``{qubit: letter}`` map."""
        bits = 0
        for q, letter in sites.items():
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
            bits |= _CODE[letter] << (2 * q)
        return cls(bits, n_qubits)

    def code(self, qubit: int) -> int:
        return (self.bits >> (2 * qubit)) & 3

    @property
    def weight(self) -> int:
        return weight(self)

    def is_identity(self) -> bool:
        return self.bits == 0

    def __str__(self) -> str:
        return "".join(decode(self))

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


@dataclass(frozen=True)
class PhasedPauli:
    """``i**phase_exponent * pauli``."""

    pauli: PauliString
    phase_exponent: int = 0

    @property
    def phase(self) -> complex:
        return (1, 1j, -1, -1j)[self.phase_exponent % 4]

    def __str__(self) -> str:
        sign = ("+", "+i", "-", "-i")[self.phase_exponent % 4]
        return f"{sign}{self.pauli}"


def encode(letters: Iterable[str], n: int | None = None) -> PauliString:
    """Pack a sequence of ``I/X/Y/Z`` letters, qubit 0 first."""
    letters = list(letters)
    if n is None:
        n = len(letters)
    if len(letters) != n:
        raise ValueError(f"expected {n} letters, got {len(letters)}")
    bits = 0
    for q, letter in enumerate(letters):
        try:
            bits |= _CODE[letter] << (2 * q)
        except KeyError:
            raise ValueError(f"invalid Pauli letter {letter!r} at qubit {q}") from None
    return PauliString(bits, n)


def decode(p: PauliString) -> list[str]:
    return [LETTERS[p.code(q)] for q in range(p.n_qubits)]


def weight(p: PauliString) -> int:
    """Number of non-identity factors."""
    b = p.bits
    return ((b | (b >> 1)) & _low_mask(p.n_qubits)).bit_count()


def _same_size(p: PauliString, q: PauliString) -> None:
    if p.n_qubits != q.n_qubits:
        raise ValueError(
            f"qubit-count mismatch: {p.n_qubits} vs {q.n_qubits}"
        )


def commutes(p: PauliString, q: PauliString) -> bool:
    _same_size(p, q)
    return not _anticommute_parity(p.bits, q.bits, p.n_qubits)


def _anticommute_parity(a: int, b: int, n: int) -> int:
    low = _low_mask(n)
    ax, az = (a ^ (a >> 1)) & low, (a >> 1) & low
    bx, bz = (b ^ (b >> 1)) & low, (b >> 1) & low
    return ((ax & bz) ^ (az & bx)).bit_count() & 1


def product(p: PauliString, q: PauliString) -> PhasedPauli:
    """Matrix product ``p @ q`` as a phased Pauli string."""
    _same_size(p, q)
    k = 0
    for qubit in range(p.n_qubits):
        a, b = p.code(qubit), q.code(qubit)
        if a and b and a != b:
            k += 1 if (a, b) in _PLUS_I else 3
    return PhasedPauli(PauliString(p.bits ^ q.bits, p.n_qubits), k % 4)


def _check_perm(perm: Sequence[int], n: int) -> tuple[int, ...]:
    perm = tuple(int(i) for i in perm)
    if len(perm) != n or sorted(perm) != list(range(n)):
        raise ValueError(f"not a bijection on {n} qubits: {perm}")
    return perm


def apply_permutation(p: PauliString, perm: Sequence[int]) -> PauliString:
    """Move the factor on qubit ``i`` to qubit ``perm[i]``."""
    perm = _check_perm(perm, p.n_qubits)
    bits = 0
    for i, target in enumerate(perm):
        bits |= p.code(i) << (2 * target)
    return PauliString(bits, p.n_qubits)


# ---------------------------------------------------------------------------
# vectorised kernels over arrays of packed keys


def key_dtype(n_qubits: int):
    _check_n(n_qubits)
    return np.dtype(np.uint64) if n_qubits <= 32 else np.dtype(object)


def _low_mask(n: int) -> int:
    return int("01" * n, 2) if n else 0


def _const(value: int, dtype):
    return np.uint64(value) if dtype == np.uint64 else int(value)


def as_keys(values, n_qubits: int) -> np.ndarray:
    """Coerce an iterable of ints/PauliStrings to a key array."""
    dtype = key_dtype(n_qubits)
    vals = [v.bits if isinstance(v, PauliString) else int(v) for v in values]
    if dtype == np.uint64:
        return np.array(vals, dtype=np.uint64)
    out = np.empty(len(vals), dtype=object)
    out[:] = vals
    return out


def popcount(keys: np.ndarray) -> np.ndarray:
    if keys.dtype == object:
        return np.fromiter((int(k).bit_count() for k in keys), dtype=np.int64, count=len(keys))
    return np.bitwise_count(keys).astype(np.int64)


def _lanes(keys: np.ndarray, n: int):
    low = _const(_low_mask(n), keys.dtype)
    one = _const(1, keys.dtype)
    return keys & low, (keys >> one) & low, low


def weight_keys(keys: np.ndarray, n_qubits: int) -> np.ndarray:
    lo, hi, _ = _lanes(keys, n_qubits)
    return popcount(lo | hi)


def anticommutes_keys(keys: np.ndarray, p_bits: int, n_qubits: int) -> np.ndarray:
    """Boolean mask: which keys anticommute with the fixed string ``p_bits``."""
    lo, hi, low = _lanes(keys, n_qubits)
    qx, qz = lo ^ hi, hi
    px = _const((p_bits ^ (p_bits >> 1)) & _low_mask(n_qubits), keys.dtype)
    pz = _const((p_bits >> 1) & _low_mask(n_qubits), keys.dtype)
    return (popcount((px & qz) ^ (pz & qx)) & 1).astype(bool)


def product_phase_keys(p_bits: int, keys: np.ndarray, n_qubits: int) -> np.ndarray:
    """Phase exponents ``k`` with ``P @ Q = i**k (P ^ Q)`` for each key ``Q``."""
    lo, hi, low = _lanes(keys, n_qubits)
    dt = keys.dtype
    pl = _const(p_bits & _low_mask(n_qubits), dt)
    ph = _const((p_bits >> 1) & _low_mask(n_qubits), dt)
    pnl, pnh = pl ^ low, ph ^ low
    ql, qh = lo, hi
    qnl, qnh = ql ^ low, qh ^ low
    p_x, p_y, p_z = pl & pnh, pnl & ph, pl & ph
    q_x, q_y, q_z = ql & qnh, qnl & qh, ql & qh
    plus = (p_x & q_y) | (p_y & q_z) | (p_z & q_x)
    minus = (p_y & q_x) | (p_z & q_y) | (p_x & q_z)
    return (popcount(plus) - popcount(minus)) % 4


def permute_keys(keys: np.ndarray, perm: Sequence[int], n_qubits: int) -> np.ndarray:
    """Vectorised :func:`apply_permutation`."""
    dt = keys.dtype
    three = _const(3, dt)
    out = np.zeros_like(keys) if dt != object else np.full(len(keys), 0, dtype=object)
    for i, target in enumerate(perm):
        if i == target:
            out |= keys & _const(3 << (2 * i), dt)
            continue
        code = (keys >> _const(2 * i, dt)) & three
        out |= code << _const(2 * target, dt)
    return out


def rotate_keys(keys: np.ndarray, shift: int, n_qubits: int) -> np.ndarray:
    """Cyclic translation by ``shift`` sites toward qubit 0.

    Qubit ``i`` moves to ``(i - shift) mod n``, i.e. ``T**shift`` with
    ``T . IXI = XII``.
    """
    shift %= n_qubits
    if shift == 0:
        return keys.copy()
    dt = keys.dtype
    width = 2 * n_qubits
    s = 2 * shift
    wrap = _const((1 << s) - 1, dt)
    return (keys >> _const(s, dt)) | ((keys & wrap) << _const(width - s, dt))


def codes_at(keys: np.ndarray, qubit: int) -> np.ndarray:
    """Integer code (0..3) on one qubit, as an ``intp`` array for indexing."""
    dt = keys.dtype
    return ((keys >> _const(2 * qubit, dt)) & _const(3, dt)).astype(np.intp)
