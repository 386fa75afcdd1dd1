"""Heisenberg-picture Pauli propagation with optional symmetry merging.

Gate convention: ``PauliRotationGate(P, theta)`` is the unitary
``exp(-i theta/2 P)``.  Conjugating a Pauli ``Q`` gives::

    U^dag Q U = Q                                  if [P, Q] = 0
              = cos(theta) Q + sin(theta) (i P Q)  if {P, Q} = 0

and ``i P Q`` is again a Hermitian Pauli string up to a sign.

A :class:`PauliSum` keeps its keys sorted and unique.  That makes the
pairing structure of a rotation cheap to exploit: an anticommuting ``Q`` maps
to ``P ^ Q``, which also anticommutes with ``P``, so new keys only need a
binary search against the existing ones.
"""

from __future__ import annotations

import io
import math
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .errors import ResourceLimitError
from .pauli import (
    PauliString,
    anticommutes_keys,
    as_keys,
    key_dtype,
    product_phase_keys,
    weight_keys,
)
from .states import ProductState, overlap_keys
from .symmetry import SymmetryGroup

__all__ = [
    "ZERO_TOL",
    "PauliSum",
    "PauliRotationGate",
    "NoiseLayer",
    "Layer",
    "Circuit",
    "MergePolicy",
    "PropagationConfig",
    "LayerRecord",
    "PropagationTrace",
    "apply_gate_adjoint",
    "apply_noise",
    "truncate",
    "merge_by_symmetry",
    "propagate",
    "expectation",
]

# accumulated coefficients below this magnitude are treated as cancelled
ZERO_TOL = 1e-15

# below this many terms a single worker is used regardless of the setting
_MIN_SHARD = 4096


class PauliSum:
    """Sparse real combination of Pauli strings.

    ``keys`` is sorted ascending with no duplicates and ``coeffs`` holds no
    zeros.  ``symmetry`` is set once the sum has been merged by a group; from
    then on its expectation values are only meaningful for states invariant
    under that group.

    Treat instances as immutable.
    """

    __slots__ = ("n_qubits", "keys", "coeffs", "symmetry")

    def __init__(self, n_qubits: int, keys=(), coeffs=(), symmetry: SymmetryGroup | None = None,
                 *, _canonical: bool = False):
        self.n_qubits = int(n_qubits)
        dtype = key_dtype(self.n_qubits)
        if _canonical:
            self.keys, self.coeffs = keys, coeffs
        else:
            keys = as_keys(keys, self.n_qubits) if not isinstance(keys, np.ndarray) else keys.astype(dtype)
            coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
            if len(keys) != len(coeffs):
                raise ValueError(f"{len(keys)} keys but {len(coeffs)} coefficients")
            limit = 1 << (2 * self.n_qubits)
            if len(keys) and (int(keys.max()) >= limit):
                raise ValueError(f"key {int(keys.max()):#x} does not fit in {self.n_qubits} qubits")
            uniq, inv = np.unique(keys, return_inverse=True)
            summed = np.bincount(inv.reshape(-1), weights=coeffs, minlength=len(uniq))
            keep = summed != 0.0
            self.keys, self.coeffs = uniq[keep], summed[keep]
        self.symmetry = symmetry

    @classmethod
    def from_terms(cls, n_qubits: int, terms: Mapping | Iterable) -> "PauliSum":
        """Build from ``{pauli: coeff}`` or ``[(pauli, coeff), ...]``.

        Paulis may be :class:`PauliString`, text labels or packed ints.
        Repeated Paulis are summed.
        """
        items = terms.items() if isinstance(terms, Mapping) else terms
        keys, coeffs = [], []
        for p, c in items:
            if isinstance(p, str):
                p = PauliString.from_label(p)
            if isinstance(p, PauliString):
                if p.n_qubits != n_qubits:
                    raise ValueError(f"{p} has {p.n_qubits} qubits, expected {n_qubits}")
                p = p.bits
            keys.append(int(p))
            coeffs.append(float(c))
        return cls(n_qubits, as_keys(keys, n_qubits), coeffs)

    @classmethod
    def single(cls, p: PauliString, coeff: float = 1.0) -> "PauliSum":
        return cls.from_terms(p.n_qubits, [(p, coeff)])

    def _with(self, keys, coeffs, symmetry="inherit") -> "PauliSum":
        keep = np.abs(coeffs) >= ZERO_TOL
        if not keep.all():
            keys, coeffs = keys[keep], coeffs[keep]
        sym = self.symmetry if symmetry == "inherit" else symmetry
        return PauliSum(self.n_qubits, keys, coeffs, sym, _canonical=True)

    def __len__(self) -> int:
        return len(self.keys)

    def __iter__(self):
        return iter(self.paulis())

    def __contains__(self, p) -> bool:
        return self[p] != 0.0

    def __getitem__(self, p) -> float:
        key = self._key(p)
        i = np.searchsorted(self.keys, key)
        if i < len(self.keys) and self.keys[i] == key:
            return float(self.coeffs[i])
        return 0.0

    def _key(self, p):
        if isinstance(p, str):
            p = PauliString.from_label(p)
        if isinstance(p, PauliString):
            if p.n_qubits != self.n_qubits:
                raise ValueError(f"{p} has {p.n_qubits} qubits, expected {self.n_qubits}")
            p = p.bits
        return as_keys([p], self.n_qubits)[0]

    def paulis(self) -> list[PauliString]:
        return [PauliString(int(k), self.n_qubits) for k in self.keys]

    def items(self):
        for k, c in zip(self.keys, self.coeffs):
            yield PauliString(int(k), self.n_qubits), float(c)

    def to_dict(self) -> dict[str, float]:
        return {str(p): c for p, c in self.items()}

    def sum_abs(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def sum_sq(self) -> float:
        return float(np.sum(self.coeffs * self.coeffs))

    def __repr__(self) -> str:
        shown = ", ".join(f"{c:+.6g}*{p}" for p, c in list(self.items())[:6])
        more = f", ... ({len(self)} terms)" if len(self) > 6 else ""
        return f"PauliSum({shown}{more})"

    def to_snapshot(self) -> str:
        """``<integer key> <coefficient>`` per line, ascending keys."""
        return "".join(f"{int(k)} {c!r}\n" for k, c in zip(self.keys, self.coeffs.tolist()))

    @classmethod
    def from_snapshot(cls, text: str, n_qubits: int) -> "PauliSum":
        keys, coeffs = [], []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                k, c = line.split()
                keys.append(int(k))
                coeffs.append(float(c))
            except ValueError:
                raise ValueError(f"bad snapshot line {lineno}: {line!r}") from None
        return cls(n_qubits, as_keys(keys, n_qubits), coeffs)


@dataclass(frozen=True)
class PauliRotationGate:
    generator: PauliString
    angle: float

    def __post_init__(self):
        if self.generator.is_identity():
            raise ValueError("rotation generator must not be the identity string")
        object.__setattr__(self, "angle", float(self.angle))


@dataclass(frozen=True)
class NoiseLayer:
    gamma: float

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"noise strength must be non-negative, got {self.gamma}")


@dataclass(frozen=True)
class Layer:
    """Gates in time order, then optional noise.

    In the Heisenberg picture the noise is applied after the adjoint gates,
    i.e. the channel acts before the gates in Schrodinger time.
    """

    gates: tuple[PauliRotationGate, ...]
    noise: NoiseLayer | None = None

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    layers: tuple[Layer, ...]

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        for l, layer in enumerate(self.layers):
            for gate in layer.gates:
                if gate.generator.n_qubits != self.n_qubits:
                    raise ValueError(
                        f"layer {l}: gate on {gate.generator.n_qubits} qubits in a "
                        f"{self.n_qubits}-qubit circuit"
                    )

    def __len__(self) -> int:
        return len(self.layers)

    @property
    def n_gates(self) -> int:
        return sum(len(layer.gates) for layer in self.layers)

    def with_noise(self, gamma: float) -> "Circuit":
        noise = NoiseLayer(gamma) if gamma > 0 else None
        return Circuit(self.n_qubits, [Layer(layer.gates, noise) for layer in self.layers])


@dataclass(frozen=True)
class MergePolicy:
    """When to merge by symmetry: ``never``, ``after_each_layer`` or every k layers."""

    kind: str = "after_each_layer"
    every: int = 1

    def __post_init__(self):
        if self.kind not in ("never", "after_each_layer", "after_k_layers"):
            raise ValueError(f"unknown merge policy {self.kind!r}")
        if self.every < 1:
            raise ValueError("merge interval must be at least 1")

    @classmethod
    def parse(cls, text: str) -> "MergePolicy":
        text = text.strip()
        if text in ("never", "after_each_layer"):
            return cls(text)
        m = re.fullmatch(r"after_k_layers[(:]\s*(\d+)\s*\)?", text)
        if m:
            return cls("after_k_layers", int(m.group(1)))
        raise ValueError(f"cannot parse merge policy {text!r}")

    def due(self, step: int) -> bool:
        if self.kind == "never":
            return False
        if self.kind == "after_each_layer":
            return True
        return step % self.every == 0

    def __str__(self) -> str:
        return f"after_k_layers({self.every})" if self.kind == "after_k_layers" else self.kind


@dataclass(frozen=True)
class PropagationConfig:
    epsilon: float = 0.0
    merge_policy: MergePolicy = field(default_factory=MergePolicy)
    symmetry: SymmetryGroup | None = None
    memory_cap: int = 10**8
    workers: int = 1

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        if isinstance(self.merge_policy, str):
            object.__setattr__(self, "merge_policy", MergePolicy.parse(self.merge_policy))
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @property
    def merging(self) -> bool:
        return (self.symmetry is not None and not self.symmetry.is_trivial
                and self.merge_policy.kind != "never")


# ---------------------------------------------------------------------------
# sharding: contiguous slices, results concatenated in slice order, so the
# output is identical for every worker count


@lru_cache(maxsize=None)
def _pool(workers: int) -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="sympp")


def _sharded(fn, size: int, workers: int):
    if workers <= 1 or size < _MIN_SHARD:
        return fn(slice(0, size))
    bounds = np.linspace(0, size, workers + 1).astype(int)
    slices = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
    parts = list(_pool(workers).map(fn, slices))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(col) for col in zip(*parts))
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# operations


def _check_gate(psum: PauliSum, gate: PauliRotationGate) -> None:
    if gate.generator.is_identity():
        raise ValueError("rotation generator must not be the identity string")
    if gate.generator.n_qubits != psum.n_qubits:
        raise ValueError(
            f"gate acts on {gate.generator.n_qubits} qubits, sum on {psum.n_qubits}"
        )


def apply_gate_adjoint(psum: PauliSum, gate: PauliRotationGate, workers: int = 1) -> PauliSum:
    """Conjugate ``psum`` by one Pauli rotation: ``U^dag O U``."""
    _check_gate(psum, gate)
    n = psum.n_qubits
    keys, coeffs = psum.keys, psum.coeffs
    p = gate.generator.bits
    dtype = keys.dtype
    p_key = np.uint64(p) if dtype == np.uint64 else p

    def split(sl):
        local = keys[sl]
        anti = anticommutes_keys(local, p, n)
        moved = local[anti]
        phase = product_phase_keys(p, moved, n)
        # P Q = i^k R, so i P Q = i^(k+1) R with k odd
        sign = np.where(phase == 3, 1.0, -1.0)
        return np.flatnonzero(anti) + sl.start, moved ^ p_key, sign

    idx, partner, sign = _sharded(split, len(keys), workers)
    if len(idx) == 0:
        return psum
    cos, sin = math.cos(gate.angle), math.sin(gate.angle)
    moved_c = coeffs[idx]
    out = coeffs.copy()
    out[idx] = moved_c * cos
    contrib = moved_c * sign * sin

    pos = np.searchsorted(keys, partner)
    hit = keys[np.minimum(pos, len(keys) - 1)] == partner
    # partners are distinct, so no index repeats here
    out[pos[hit]] += contrib[hit]

    fresh = ~hit
    if fresh.any():
        new_keys, new_c = partner[fresh], contrib[fresh]
        order = np.argsort(new_keys, kind="stable")
        new_keys, new_c = new_keys[order], new_c[order]
        at = np.searchsorted(keys, new_keys)
        keys = np.insert(keys, at, new_keys)
        out = np.insert(out, at, new_c)
    return psum._with(keys, out)


def apply_noise(psum: PauliSum, noise: NoiseLayer) -> PauliSum:
    """Damp each coefficient by ``exp(-gamma * weight)``."""
    if noise.gamma < 0:
        raise ValueError(f"noise strength must be non-negative, got {noise.gamma}")
    if noise.gamma == 0 or len(psum) == 0:
        return psum
    w = weight_keys(psum.keys, psum.n_qubits)
    return psum._with(psum.keys, psum.coeffs * np.exp(-noise.gamma * w))


def truncate(psum: PauliSum, epsilon: float) -> PauliSum:
    """Drop terms with ``|c| < epsilon``."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    if epsilon == 0:
        return psum
    keep = np.abs(psum.coeffs) >= epsilon
    if keep.all():
        return psum
    return PauliSum(psum.n_qubits, psum.keys[keep], psum.coeffs[keep], psum.symmetry,
                    _canonical=True)


def merge_by_symmetry(psum: PauliSum, group: SymmetryGroup | None, workers: int = 1) -> PauliSum:
    """Replace every string by its orbit representative and add coefficients."""
    if group is None:
        return psum
    if group.n_qubits != psum.n_qubits:
        raise ValueError(f"size mismatch: group on {group.n_qubits} qubits, sum on {psum.n_qubits}")
    if group.is_trivial:
        return psum
    keys = psum.keys
    reps = _sharded(lambda sl: group.canonical_keys(keys[sl]), len(keys), workers)
    uniq, inv = np.unique(reps, return_inverse=True)
    # bincount adds in input order (ascending original key): deterministic
    merged = np.bincount(inv.reshape(-1), weights=psum.coeffs, minlength=len(uniq))
    return psum._with(uniq, merged, symmetry=group)


def expectation(psum: PauliSum, state: ProductState, workers: int = 1) -> float:
    """``sum_P c_P tr(rho P)`` for a product state ``rho``.

    A merged sum requires a state invariant under its symmetry group.
    """
    if state.n_qubits != psum.n_qubits:
        raise ValueError(f"qubit-count mismatch: state {state.n_qubits}, sum {psum.n_qubits}")
    group = psum.symmetry
    if group is not None and not group.is_trivial and not group.preserves(state.bloch, atol=1e-12):
        raise ValueError(
            f"state is not invariant under {group.label()}; merged expectation values "
            "would be wrong"
        )
    ov = _sharded(lambda sl: overlap_keys(state, psum.keys[sl]), len(psum), workers)
    return float(np.sum(psum.coeffs * ov))


@dataclass(frozen=True)
class LayerRecord:
    layer: int
    n_terms: int
    sum_abs_coeff: float
    sum_sq_coeff: float
    expectation: float
    wall_ms: float


CSV_COLUMNS = ("layer", "time", "n_terms", "sum_abs_coeff", "sum_sq_coeff", "expectation", "wall_ms")


def fmt(x: float) -> str:
    """17 significant digits, round-trip exact."""
    return format(float(x), ".17g")


@dataclass
class PropagationTrace:
    """Final operator plus one record per applied layer (row 0 = input)."""

    final: PauliSum
    records: list[LayerRecord]
    time_step: float | None = None

    @property
    def n_terms(self) -> list[int]:
        return [r.n_terms for r in self.records]

    @property
    def expectations(self) -> list[float]:
        return [r.expectation for r in self.records]

    def time(self, layer: int) -> float:
        return layer * (self.time_step if self.time_step is not None else 1.0)

    def to_csv(self, target=None, timing: bool = True) -> str:
        """Write the CSV (``wall_ms`` is 0 when ``timing`` is off)."""
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for r in self.records:
            row = [str(r.layer), fmt(self.time(r.layer)), str(r.n_terms), fmt(r.sum_abs_coeff),
                   fmt(r.sum_sq_coeff), fmt(r.expectation), fmt(r.wall_ms if timing else 0.0)]
            buf.write(",".join(row) + "\n")
        text = buf.getvalue()
        if target is not None:
            if isinstance(target, (str, os.PathLike)):
                with open(target, "w", newline="") as fh:
                    fh.write(text)
            else:
                target.write(text)
        return text


def _record(step, psum, state, workers, started):
    value = expectation(psum, state, workers) if state is not None else math.nan
    return LayerRecord(step, len(psum), psum.sum_abs(), psum.sum_sq(), value,
                       (time.perf_counter() - started) * 1e3)


def propagate(observable: PauliSum, circuit: Circuit, config: PropagationConfig | None = None,
              state: ProductState | None = None, time_step: float | None = None,
              callback=None) -> PropagationTrace:
    """Run the circuit backwards on ``observable``.

    Layers are applied last-to-first and gates within a layer last-to-first.
    After each layer: noise, truncation, then merging if the policy says so.
    With symmetry enabled the observable is merged once before the first
    layer.  Records carry ``expectation`` on ``state`` (``nan`` without one).

    ``callback(step, psum)`` is called after every layer.
    """
    config = config or PropagationConfig()
    n = observable.n_qubits
    if circuit.n_qubits != n:
        raise ValueError(f"circuit has {circuit.n_qubits} qubits, observable {n}")
    if state is not None and state.n_qubits != n:
        raise ValueError(f"state has {state.n_qubits} qubits, observable {n}")
    group = config.symmetry if config.merging else None
    if group is not None and group.n_qubits != n:
        raise ValueError(f"symmetry acts on {group.n_qubits} qubits, observable {n}")
    workers = config.workers

    started = time.perf_counter()
    current = observable
    if group is not None:
        current = merge_by_symmetry(current, group, workers)
    records = [_record(0, current, state, workers, started)]
    for step, layer in enumerate(reversed(circuit.layers), 1):
        started = time.perf_counter()
        for gate in reversed(layer.gates):
            current = apply_gate_adjoint(current, gate, workers)
            if len(current) > config.memory_cap:
                raise ResourceLimitError(
                    f"layer {step}: {len(current)} terms exceed the memory cap of "
                    f"{config.memory_cap}", layer=step, size=len(current),
                )
        if layer.noise is not None:
            current = apply_noise(current, layer.noise)
        current = truncate(current, config.epsilon)
        if group is not None and config.merge_policy.due(step):
            current = merge_by_symmetry(current, group, workers)
        records.append(_record(step, current, state, workers, started))
        if callback is not None:
            callback(step, current)
    return PropagationTrace(current, records, time_step)
