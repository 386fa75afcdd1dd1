"""Batch experiment driver.

Subcommands::

    sympp propagate --config run.json [--compare] [--output out.csv]
    sympp compare --config run.json
    sympp count-reps --group translation_1d --n-min 2 --n-max 12
    sympp oracle-check --n 4 --trials 20

Command-line flags override the matching config fields.  Exit status: 0 on
success, 2 for invalid input, 3 when the memory cap is hit, 4 on I/O errors.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ResourceLimitError
from .models import (
    IsingParams,
    XXZParams,
    build_ising_circuit,
    build_xxz_circuit,
    mid_chain_z,
    random_circuit,
    random_symmetric_circuit,
    total_spin_squared,
)
from .pauli import PauliString
from .propagation import (
    Circuit,
    MergePolicy,
    PauliSum,
    PropagationConfig,
    fmt,
    propagate,
)
from .states import ProductState
from .symmetry import SymmetryGroup, count_representatives

log = logging.getLogger("sympp")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RESOURCE = 3
EXIT_IO = 4

COMPARE_COLUMNS = ("layer", "n_terms_standard", "n_terms_symmetry",
                   "expectation_standard", "expectation_symmetry")


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class RunConfig:
    model: IsingParams | XXZParams
    circuit: Circuit
    observable: PauliSum
    state: ProductState
    symmetry: SymmetryGroup
    epsilon: float = 0.0
    gamma: float = 0.0
    merge_policy: MergePolicy = MergePolicy()
    output_path: str | None = None
    snapshot_path: str | None = None
    memory_cap: int = 10**8
    seed: int = 0
    threads: int = 1

    @property
    def n(self) -> int:
        return self.circuit.n_qubits

    @property
    def time_step(self) -> float:
        return self.model.delta_t


def _number(raw: dict, key: str, where: str, *, required: bool = False, default=None, kind=float):
    if key not in raw:
        if required:
            raise ConfigError(f"{where}.{key}", "is required")
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {value!r}")
    if kind is int:
        if value != int(value):
            raise ConfigError(f"{where}.{key}", f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _parse_model(raw):
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ConfigError("model", 'expected {"ising": {...}} or {"xxz": {...}}')
    (name, params), = raw.items()
    where = f"model.{name}"
    if not isinstance(params, dict):
        raise ConfigError(where, "expected an object of model parameters")
    try:
        if name == "ising":
            known = {"n", "h_x", "h_z", "delta_t", "layers", "boundary"}
            _reject_unknown(params, known, where)
            model = IsingParams(
                n=_number(params, "n", where, required=True, kind=int),
                h_x=_number(params, "h_x", where, default=1.4),
                h_z=_number(params, "h_z", where, default=0.9045),
                delta_t=_number(params, "delta_t", where, required=True),
                layers=_number(params, "layers", where, required=True, kind=int),
                boundary=params.get("boundary", "periodic"),
            )
            return model, build_ising_circuit(model)
        if name == "xxz":
            known = {"n", "lx", "ly", "j_perp", "delta", "alpha", "delta_t", "layers", "ordering"}
            _reject_unknown(params, known, where)
            model = XXZParams(
                lx=_number(params, "lx", where, required=True, kind=int),
                ly=_number(params, "ly", where, required=True, kind=int),
                j_perp=_number(params, "j_perp", where, default=1.0),
                delta=_number(params, "delta", where, default=-1.8),
                alpha=_number(params, "alpha", where, required=True),
                delta_t=_number(params, "delta_t", where, required=True),
                layers=_number(params, "layers", where, required=True, kind=int),
            )
            n = _number(params, "n", where, kind=int)
            if n is not None and n != model.n:
                raise ConfigError(f"{where}.n", f"n={n} but lx*ly = {model.n}")
            return model, build_xxz_circuit(model, params.get("ordering", "sublayer"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(where, str(exc)) from None
    raise ConfigError("model", f"unknown model {name!r}")


def _reject_unknown(params: dict, known: set, where: str):
    extra = sorted(set(params) - known)
    if extra:
        raise ConfigError(f"{where}.{extra[0]}", "unknown parameter")


def _parse_observable(raw, n: int) -> PauliSum:
    if raw == "mid_chain_z":
        return mid_chain_z(n)
    if raw == "total_spin_squared":
        return total_spin_squared(n)
    if isinstance(raw, dict) and set(raw) == {"pauli"}:
        value = raw["pauli"]
        terms = {value: 1.0} if isinstance(value, str) else value
        try:
            for label in terms:
                if len(label) != n:
                    raise ValueError(f"{label!r} has length {len(label)}, model has {n} qubits")
            return PauliSum.from_terms(n, {PauliString.from_label(k): float(v) for k, v in terms.items()})
        except (ValueError, TypeError) as exc:
            raise ConfigError("observable.pauli", str(exc)) from None
    raise ConfigError("observable", f"expected 'mid_chain_z', 'total_spin_squared' or "
                                    f"{{'pauli': ...}}, got {raw!r}")


def _parse_state(raw, n: int) -> ProductState:
    try:
        if isinstance(raw, str):
            return ProductState.named(n, raw)
        if isinstance(raw, dict) and set(raw) == {"bloch"}:
            b = np.asarray(raw["bloch"], dtype=float)
            if b.shape == (3,):
                return ProductState.uniform(n, b)
            if b.shape != (n, 3):
                raise ValueError(f"expected 3 or {n}x3 Bloch components, got shape {b.shape}")
            return ProductState(b)
    except (ValueError, TypeError) as exc:
        raise ConfigError("state", str(exc)) from None
    raise ConfigError("state", f"cannot parse {raw!r}")


def parse_config(raw: dict) -> RunConfig:
    """Validate a run-config document and build everything it describes."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a JSON object")
    known = {"model", "observable", "state", "symmetry", "epsilon", "gamma", "merge_policy",
             "output_path", "snapshot_path", "memory_cap", "seed", "threads"}
    extra = sorted(set(raw) - known)
    if extra:
        raise ConfigError(extra[0], "unknown field")
    if "model" not in raw:
        raise ConfigError("model", "is required")
    model, circuit = _parse_model(raw["model"])
    n = circuit.n_qubits
    observable = _parse_observable(raw.get("observable", "mid_chain_z"), n)
    state = _parse_state(raw.get("state", "plus_x"), n)
    try:
        symmetry = SymmetryGroup.from_config(raw.get("symmetry"), n)
    except ValueError as exc:
        raise ConfigError("symmetry", str(exc)) from None
    if not symmetry.is_trivial:
        if isinstance(model, IsingParams) and model.boundary != "periodic":
            raise ConfigError("symmetry", "translation merging needs a periodic chain")
        if not symmetry.preserves(state.bloch, atol=1e-12):
            raise ConfigError("state", f"not invariant under {symmetry.label()}")
    epsilon = _number(raw, "epsilon", "config", default=0.0)
    gamma = _number(raw, "gamma", "config", default=0.0)
    if epsilon < 0:
        raise ConfigError("epsilon", "must be non-negative")
    if gamma < 0:
        raise ConfigError("gamma", "must be non-negative")
    try:
        policy = MergePolicy.parse(raw.get("merge_policy", "after_each_layer"))
    except (ValueError, AttributeError) as exc:
        raise ConfigError("merge_policy", str(exc)) from None
    memory_cap = _number(raw, "memory_cap", "config", default=10**8, kind=int)
    if memory_cap < 1:
        raise ConfigError("memory_cap", "must be positive")
    threads = _number(raw, "threads", "config", default=1, kind=int)
    if threads < 1:
        raise ConfigError("threads", "must be at least 1")
    return RunConfig(
        model=model, circuit=circuit.with_noise(gamma), observable=observable, state=state,
        symmetry=symmetry, epsilon=epsilon, gamma=gamma, merge_policy=policy,
        output_path=raw.get("output_path"), snapshot_path=raw.get("snapshot_path"),
        memory_cap=memory_cap, seed=_number(raw, "seed", "config", default=0, kind=int),
        threads=threads,
    )


def _propagation_config(cfg: RunConfig, symmetric: bool) -> PropagationConfig:
    return PropagationConfig(
        epsilon=cfg.epsilon,
        merge_policy=cfg.merge_policy,
        symmetry=cfg.symmetry if symmetric else None,
        memory_cap=cfg.memory_cap,
        workers=cfg.threads,
    )


def run(cfg: RunConfig, compare: bool = False, timing: bool = True) -> str:
    """Run the configured experiment and return the CSV text."""
    symmetric = not cfg.symmetry.is_trivial
    if not compare:
        trace = propagate(cfg.observable, cfg.circuit, _propagation_config(cfg, symmetric),
                          cfg.state, cfg.time_step)
        _snapshot(cfg, trace.final)
        return trace.to_csv(timing=timing)
    std = propagate(cfg.observable, cfg.circuit, _propagation_config(cfg, False), cfg.state,
                    cfg.time_step)
    sym = propagate(cfg.observable, cfg.circuit, _propagation_config(cfg, True), cfg.state,
                    cfg.time_step)
    _snapshot(cfg, sym.final)
    buf = io.StringIO()
    buf.write(",".join(COMPARE_COLUMNS) + "\n")
    for a, b in zip(std.records, sym.records):
        buf.write(f"{a.layer},{a.n_terms},{b.n_terms},{fmt(a.expectation)},{fmt(b.expectation)}\n")
    return buf.getvalue()


def _snapshot(cfg: RunConfig, psum: PauliSum) -> None:
    if cfg.snapshot_path:
        Path(cfg.snapshot_path).write_text(psum.to_snapshot())


def count_reps_table(group_kind: str, ns, lx: int | None = None, ly: int | None = None,
                     generators=None) -> str:
    """CSV rows ``n, group, count, ratio`` with ``ratio = count / 4**n``."""
    lines = ["n,group,count,ratio"]
    for n in ns:
        if group_kind == "translation_2d":
            if lx is None or ly is None:
                raise ConfigError("group", "translation_2d needs --lx and --ly")
            group = SymmetryGroup.translation_2d(lx, ly)
        elif group_kind == "generic":
            group = SymmetryGroup.generic(n, generators or [])
        else:
            group = SymmetryGroup.from_config(group_kind, n)
        count = count_representatives(group)
        ratio = Fraction(count, 4 ** group.n_qubits)
        lines.append(f"{group.n_qubits},{group.label()},{count},{fmt(float(ratio))}")
    return "\n".join(lines) + "\n"


def oracle_check(n: int, trials: int, gates: int, seed: int, group_kind: str | None,
                 layers: int = 4, tol: float = 1e-8) -> tuple[float, str]:
    """Engine vs dense oracle on random circuits; returns (max error, report)."""
    from .oracle import layer_expectations

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        v = rng.normal(size=3)
        state = ProductState.uniform(n, v / max(1.0, float(np.linalg.norm(v))))
        obs = PauliSum(n, rng.choice(4 ** n, size=3, replace=False).astype(np.uint64),
                       rng.normal(size=3))
        if group_kind and group_kind != "trivial":
            group = SymmetryGroup.from_config(group_kind, n)
            circuit = random_symmetric_circuit(group, layers, rng)
            cfg = PropagationConfig(symmetry=group)
        else:
            circuit = random_circuit(n, gates, rng, layers=layers)
            cfg = PropagationConfig()
        got = propagate(obs, circuit, cfg, state).expectations
        want = layer_expectations(obs, circuit, state)
        worst = max(worst, float(np.max(np.abs(np.subtract(got, want)))))
    report = f"n={n} trials={trials} group={group_kind or 'trivial'} max_abs_error={worst:.3e}"
    return worst, report


def _parse_n_range(args) -> list[int]:
    if args.n is not None:
        return [args.n]
    lo = args.n_min if args.n_min is not None else 1
    hi = args.n_max if args.n_max is not None else lo
    if lo < 1 or hi < lo:
        raise ConfigError("n", f"invalid range {lo}..{hi}")
    return list(range(lo, hi + 1))


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).write_text(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sympp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("propagate", "compare"):
        p = sub.add_parser(name, help="run an experiment from a JSON config")
        p.add_argument("--config", required=True, help="run-config JSON file")
        p.add_argument("--output", help="CSV path (default: config output_path, else stdout)")
        p.add_argument("--threads", type=int, help="worker cap")
        p.add_argument("--memory-cap", type=int, help="maximum number of terms")
        p.add_argument("--snapshot", help="write the final operator snapshot here")
        p.add_argument("--no-timing", action="store_true", help="write wall_ms as 0")
        if name == "propagate":
            p.add_argument("--compare", action="store_true",
                           help="run standard and symmetry propagation and join the results")

    p = sub.add_parser("count-reps", help="tabulate orbit-representative counts")
    p.add_argument("--group", required=True,
                   choices=["trivial", "translation_1d", "translation_2d", "dihedral",
                            "permutation_full", "permutation", "generic"])
    p.add_argument("--n", type=int)
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--lx", type=int)
    p.add_argument("--ly", type=int)
    p.add_argument("--generators", help="JSON list of permutations for a generic group")
    p.add_argument("--output")

    p = sub.add_parser("oracle-check", help="compare the engine with the dense oracle")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--gates", type=int, default=30)
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--group", default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    return parser


def _load_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("propagate", "compare"):
            raw = _load_json(args.config)
            if args.threads is not None:
                raw["threads"] = args.threads
            if args.memory_cap is not None:
                raw["memory_cap"] = args.memory_cap
            if args.snapshot is not None:
                raw["snapshot_path"] = args.snapshot
            cfg = parse_config(raw)
            compare = args.command == "compare" or args.compare
            if compare and cfg.symmetry.is_trivial:
                raise ConfigError("symmetry", "--compare needs a non-trivial symmetry")
            log.info("running %s on %d qubits, %d layers", type(cfg.model).__name__,
                     cfg.n, len(cfg.circuit))
            text = run(cfg, compare=compare, timing=not args.no_timing)
            _write(text, args.output or cfg.output_path)
        elif args.command == "count-reps":
            gens = json.loads(args.generators) if args.generators else None
            ns = [args.lx * args.ly] if args.group == "translation_2d" and args.lx and args.ly \
                else _parse_n_range(args)
            _write(count_reps_table(args.group, ns, args.lx, args.ly, gens), args.output)
        elif args.command == "oracle-check":
            worst, report = oracle_check(args.n, args.trials, args.gates, args.seed, args.group,
                                         args.layers, args.tol)
            print(report)
            if not worst <= args.tol:
                print(f"FAILED: error above tolerance {args.tol:g}", file=sys.stderr)
                return 1
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConfigError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
