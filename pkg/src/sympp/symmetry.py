"""Finite qubit-permutation groups acting on Pauli strings.

Every group here acts by relabelling qubits, with no phases.  A Pauli
string's canonical representative is the member of its orbit with the
smallest packed integer.  Specialised groups get direct routines:

* ``translation_1d`` / ``translation_2d``: minimise over explicit shifts
  (integer rotations of the packed key).
* ``dihedral``: shifts of the string and of its reversal.
* ``permutation_full``: count X, Y, Z and rebuild ``Z..Z Y..Y X..X I..I``
  (qubit 0 leftmost), which is already the integer minimum, so the n!
  elements are never enumerated.
* ``generic``: user generators closed under composition; canonicalisation
  scans every element.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .pauli import (
    PauliString,
    _check_perm,
    _const,
    apply_permutation,
    as_keys,
    codes_at,
    key_dtype,
    permute_keys,
    rotate_keys,
)

__all__ = [
    "KINDS",
    "SymmetryGroup",
    "OrbitReport",
    "orbit",
    "canonical_rep",
    "count_representatives",
    "count_representatives_translation_closed_form",
    "count_representatives_permutation_closed_form",
    "cycle_count",
]

KINDS = (
    "trivial",
    "translation_1d",
    "translation_2d",
    "dihedral",
    "permutation_full",
    "generic",
)

DEFAULT_MAX_ELEMENTS = 10_000


def _compose(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    """``a o b``: apply ``b`` first, then ``a``."""
    return tuple(a[b[i]] for i in range(len(b)))


def cycle_count(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    cycles = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        cycles += 1
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
    return cycles


class SymmetryGroup:
    """A finite group of qubit permutations with a canonicalisation strategy.

    Build instances through the classmethods (:meth:`trivial`,
    :meth:`translation_1d`, :meth:`translation_2d`, :meth:`dihedral`,
    :meth:`permutation_full`, :meth:`generic`).  Instances are immutable.

    A permutation ``perm`` sends the factor on qubit ``i`` to qubit
    ``perm[i]``.
    """

    def __init__(self, kind: str, n_qubits: int, *, lx: int | None = None,
                 ly: int | None = None, elements: Sequence[Sequence[int]] | None = None,
                 generators: Sequence[Sequence[int]] | None = None):
        if kind not in KINDS:
            raise ValueError(f"unknown symmetry kind {kind!r}")
        key_dtype(n_qubits)
        self.kind = kind
        self.n_qubits = int(n_qubits)
        self.lx = lx
        self.ly = ly
        self.generators = tuple(tuple(g) for g in generators) if generators else ()
        self._elements = tuple(tuple(e) for e in elements) if elements is not None else None

    # -- constructors -------------------------------------------------------

    @classmethod
    def trivial(cls, n_qubits: int) -> "SymmetryGroup":
        return cls("trivial", n_qubits)

    @classmethod
    def translation_1d(cls, n_qubits: int) -> "SymmetryGroup":
        shift = tuple((i - 1) % n_qubits for i in range(n_qubits))
        return cls("translation_1d", n_qubits, generators=[shift])

    @classmethod
    def translation_2d(cls, lx: int, ly: int) -> "SymmetryGroup":
        """Z_lx x Z_ly on a torus, qubit ``q = y * lx + x``."""
        if lx < 1 or ly < 1:
            raise ValueError(f"lattice dimensions must be positive, got {lx}x{ly}")
        n = lx * ly
        tx = tuple(y * lx + (x - 1) % lx for y in range(ly) for x in range(lx))
        ty = tuple(((y - 1) % ly) * lx + x for y in range(ly) for x in range(lx))
        return cls("translation_2d", n, lx=lx, ly=ly, generators=[tx, ty])

    @classmethod
    def dihedral(cls, n_qubits: int) -> "SymmetryGroup":
        n = n_qubits
        shift = tuple((i - 1) % n for i in range(n))
        flip = tuple(n - 1 - i for i in range(n))
        return cls("dihedral", n, generators=[shift, flip])

    @classmethod
    def permutation_full(cls, n_qubits: int) -> "SymmetryGroup":
        n = n_qubits
        gens = []
        if n > 1:
            gens = [tuple([1, 0] + list(range(2, n))),
                    tuple((i + 1) % n for i in range(n))]
        return cls("permutation_full", n, generators=gens)

    @classmethod
    def generic(cls, n_qubits: int, generators: Iterable[Sequence[int]],
                max_elements: int = DEFAULT_MAX_ELEMENTS) -> "SymmetryGroup":
        """Close ``generators`` under composition (breadth first).

        Raises ``ValueError`` if the closure exceeds ``max_elements``.
        """
        gens = [_check_perm(g, n_qubits) for g in generators]
        identity = tuple(range(n_qubits))
        seen = {identity}
        order = [identity]
        queue = deque([identity])
        while queue:
            g = queue.popleft()
            for h in gens:
                gh = _compose(h, g)
                if gh not in seen:
                    if len(seen) >= max_elements:
                        raise ValueError(
                            f"group generated by {gens} has more than {max_elements} elements"
                        )
                    seen.add(gh)
                    order.append(gh)
                    queue.append(gh)
        return cls("generic", n_qubits, elements=order, generators=gens)

    @classmethod
    def from_config(cls, config, n_qubits: int) -> "SymmetryGroup":
        """Parse the run-config form of a group.

        Accepts ``"translation_1d"``, ``{"translation_2d": {"lx": 3, "ly": 3}}``,
        ``{"generic": {"generators": [[1, 2, 0]]}}`` and so on.  ``None`` or
        ``"none"`` gives the trivial group.
        """
        if config is None or config in ("none", "trivial"):
            return cls.trivial(n_qubits)
        if isinstance(config, str):
            name, params = config, {}
        elif isinstance(config, dict) and len(config) == 1:
            (name, params), = config.items()
            params = params or {}
        else:
            raise ValueError(f"cannot parse symmetry {config!r}")
        if name == "translation_1d":
            return cls.translation_1d(n_qubits)
        if name == "dihedral":
            return cls.dihedral(n_qubits)
        if name in ("permutation_full", "permutation"):
            return cls.permutation_full(n_qubits)
        if name == "translation_2d":
            try:
                lx, ly = int(params["lx"]), int(params["ly"])
            except (KeyError, TypeError):
                raise ValueError("translation_2d needs integer 'lx' and 'ly'") from None
            if lx * ly != n_qubits:
                raise ValueError(f"translation_2d lattice {lx}x{ly} does not match n={n_qubits}")
            return cls.translation_2d(lx, ly)
        if name == "generic":
            gens = params.get("generators")
            if not gens:
                raise ValueError("generic symmetry needs a non-empty 'generators' list")
            return cls.generic(n_qubits, gens,
                               max_elements=int(params.get("max_elements", DEFAULT_MAX_ELEMENTS)))
        raise ValueError(f"unknown symmetry kind {name!r}")

    # -- group data ---------------------------------------------------------

    @property
    def is_trivial(self) -> bool:
        return self.kind == "trivial" or self.order == 1

    @cached_property
    def order(self) -> int:
        n = self.n_qubits
        if self.kind == "trivial":
            return 1
        if self.kind == "translation_1d":
            return n
        if self.kind == "translation_2d":
            return n
        if self.kind == "dihedral":
            # D_1 and D_2 collapse: the flip coincides with a rotation
            return len(self.elements)
        if self.kind == "permutation_full":
            return math.factorial(n)
        return len(self.elements)

    @property
    def elements(self) -> tuple[tuple[int, ...], ...]:
        """All group elements as permutations (identity first)."""
        if self._elements is None:
            self._elements = self._materialize()
        return self._elements

    def _materialize(self):
        n = self.n_qubits
        identity = tuple(range(n))
        if self.kind == "trivial":
            return (identity,)
        if self.kind == "translation_1d":
            return tuple(tuple((i - s) % n for i in range(n)) for s in range(n))
        if self.kind == "translation_2d":
            lx, ly = self.lx, self.ly
            return tuple(
                tuple(((y - sy) % ly) * lx + (x - sx) % lx for y in range(ly) for x in range(lx))
                for sy in range(ly) for sx in range(lx)
            )
        if self.kind == "dihedral":
            rots = [tuple((i - s) % n for i in range(n)) for s in range(n)]
            refl = [tuple((n - 1 - i - s) % n for i in range(n)) for s in range(n)]
            out = []
            for g in rots + refl:
                if g not in out:
                    out.append(g)
            return tuple(out)
        if self.kind == "permutation_full":
            raise ValueError(
                "permutation_full is never materialised; its order is n! "
                f"= {math.factorial(n)}"
            )
        raise AssertionError("generic groups are materialised at construction")

    def __repr__(self) -> str:
        extra = f", lx={self.lx}, ly={self.ly}" if self.kind == "translation_2d" else ""
        return f"SymmetryGroup({self.kind!r}, n_qubits={self.n_qubits}{extra})"

    def label(self) -> str:
        if self.kind == "translation_2d":
            return f"translation_2d({self.lx}x{self.ly})"
        return self.kind

    def preserves(self, values: np.ndarray, atol: float = 0.0) -> bool:
        """Whether per-qubit data ``values[q]`` is invariant under the group."""
        values = np.asarray(values)
        if self.kind == "permutation_full":
            return bool(np.all(np.abs(values - values[0]) <= atol))
        for g in self.generators:
            moved = np.empty_like(values)
            moved[list(g)] = values
            if not np.all(np.abs(moved - values) <= atol):
                return False
        return True

    # -- canonicalisation ---------------------------------------------------

    def canonical_keys(self, keys: np.ndarray) -> np.ndarray:
        """Lowest-integer orbit representative of each packed key."""
        n = self.n_qubits
        if self.kind == "trivial" or len(keys) == 0:
            return keys.copy()
        if self.kind == "translation_1d":
            return self._min_rotations(keys)
        if self.kind == "dihedral":
            best = self._min_rotations(keys)
            flipped = permute_keys(keys, tuple(n - 1 - i for i in range(n)), n)
            return np.minimum(best, self._min_rotations(flipped))
        if self.kind == "translation_2d":
            best = None
            for sx in range(self.lx):
                shifted = self._shift_rows(keys, sx)
                for sy in range(self.ly):
                    cand = rotate_keys(shifted, sy * self.lx, n)
                    best = cand if best is None else np.minimum(best, cand)
            return best
        if self.kind == "permutation_full":
            return _sorted_counts(keys, n)
        best = keys.copy()
        for g in self.elements[1:]:
            best = np.minimum(best, permute_keys(keys, g, n))
        return best

    def _min_rotations(self, keys):
        best = keys.copy()
        for s in range(1, self.n_qubits):
            best = np.minimum(best, rotate_keys(keys, s, self.n_qubits))
        return best

    def _shift_rows(self, keys, shift):
        """Translate every row of the torus by ``shift`` sites toward x = 0."""
        lx, ly = self.lx, self.ly
        shift %= lx
        if shift == 0:
            return keys.copy()
        dt = keys.dtype
        keep = wrap = 0
        for y in range(ly):
            base = 2 * y * lx
            keep |= ((1 << (2 * (lx - shift))) - 1) << base
            wrap |= ((1 << (2 * shift)) - 1) << base
        s = 2 * shift
        lower = (keys >> _const(s, dt)) & _const(keep, dt)
        upper = (keys & _const(wrap, dt)) << _const(2 * (lx - shift), dt)
        return lower | upper

    def canonical(self, s: PauliString) -> PauliString:
        _check_size(self, s)
        return PauliString(int(self.canonical_keys(as_keys([s], self.n_qubits))[0]),
                           self.n_qubits)


def _sorted_counts(keys: np.ndarray, n: int) -> np.ndarray:
    """Representative ``Z^nz Y^ny X^nx I^...`` for each key (qubit 0 first)."""
    counts = np.zeros((len(keys), 4), dtype=np.int64)
    for q in range(n):
        counts[np.arange(len(keys)), codes_at(keys, q)] += 1
    nx, ny, nz = counts[:, 1], counts[:, 2], counts[:, 3]
    # block of k equal codes c starting at qubit m: c * (4**k - 1) / 3 * 4**m
    if key_dtype(n) == np.uint64:
        ones = np.array([((1 << (2 * k)) - 1) // 3 for k in range(n + 1)], dtype=np.uint64)
        z_part = ones[nz] * np.uint64(3)
        y_part = (ones[ny] * np.uint64(2)) << (2 * nz).astype(np.uint64)
        x_part = ones[nx] << (2 * (nz + ny)).astype(np.uint64)
        # a zero-length block may carry an out-of-range shift
        y_part = np.where(ny > 0, y_part, np.uint64(0))
        x_part = np.where(nx > 0, x_part, np.uint64(0))
        return z_part | y_part | x_part
    out = np.empty(len(keys), dtype=object)
    for i, (a, b, c) in enumerate(zip(nx.tolist(), ny.tolist(), nz.tolist())):
        ones = lambda k: ((1 << (2 * k)) - 1) // 3  # noqa: E731
        out[i] = 3 * ones(c) | (2 * ones(b)) << (2 * c) | ones(a) << (2 * (b + c))
    return out


def _check_size(group: SymmetryGroup, s: PauliString) -> None:
    if s.n_qubits != group.n_qubits:
        raise ValueError(
            f"size mismatch: group acts on {group.n_qubits} qubits, string has {s.n_qubits}"
        )


@dataclass(frozen=True)
class OrbitReport:
    representative: PauliString
    orbit_size: int
    members: tuple[PauliString, ...] | None = None


def orbit(group: SymmetryGroup, s: PauliString, materialize: bool = True) -> OrbitReport:
    """Orbit of ``s`` under ``group``.

    For ``permutation_full`` only the size is available (multinomial
    coefficient); asking for members raises ``ValueError``.
    """
    _check_size(group, s)
    rep = group.canonical(s)
    if group.kind == "permutation_full":
        if materialize:
            raise ValueError("orbit members are not materialised for permutation_full")
        counts = [0, 0, 0, 0]
        for q in range(s.n_qubits):
            counts[s.code(q)] += 1
        size = math.factorial(s.n_qubits)
        for c in counts:
            size //= math.factorial(c)
        return OrbitReport(rep, size, None)
    members = sorted({apply_permutation(s, g) for g in group.elements})
    return OrbitReport(rep, len(members), tuple(members) if materialize else None)


def canonical_rep(group: SymmetryGroup, s: PauliString) -> PauliString:
    return group.canonical(s)


def count_representatives_translation_closed_form(n: int) -> int:
    """Number of 4-colour necklaces of length ``n``."""
    if n < 1:
        raise ValueError("n must be positive")
    return sum(4 ** math.gcd(j, n) for j in range(1, n + 1)) // n


def count_representatives_permutation_closed_form(n: int) -> int:
    return math.comb(n + 3, 3)


def count_representatives(group: SymmetryGroup) -> int:
    """Number of orbits on all ``4**n`` Pauli strings (Burnside)."""
    n = group.n_qubits
    if group.kind == "trivial":
        return 4 ** n
    if group.kind == "translation_1d":
        return count_representatives_translation_closed_form(n)
    if group.kind == "permutation_full":
        return count_representatives_permutation_closed_form(n)
    elements = group.elements
    total = sum(4 ** cycle_count(g) for g in elements)
    count, rem = divmod(total, len(elements))
    if rem:
        raise AssertionError(f"Burnside sum {total} not divisible by |G| = {len(elements)}")
    return count
