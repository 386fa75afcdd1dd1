import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sympp import (
    Circuit,
    Layer,
    MergePolicy,
    NoiseLayer,
    PauliRotationGate,
    PauliString,
    PauliSum,
    ProductState,
    PropagationConfig,
    ResourceLimitError,
    SymmetryGroup,
    apply_gate_adjoint,
    apply_noise,
    expectation,
    merge_by_symmetry,
    propagate,
    truncate,
)
from sympp.models import IsingParams, build_ising_circuit, mid_chain_z, random_circuit
from sympp.oracle import densify, layer_expectations

from helpers import dense

P = PauliString.from_label


def S(terms):
    n = len(next(iter(terms)))
    return PauliSum.from_terms(n, terms)


def gate(label, angle):
    return PauliRotationGate(P(label), angle)


def test_paulisum_invariants():
    s = S({"XI": 1.0, "IX": 0.0, "ZZ": -2.0})
    assert len(s) == 2 and "IX" not in s
    assert list(s.keys) == sorted(s.keys)
    assert S([("XI", 1.0), ("XI", -1.0), ("ZZ", 1.0)]).to_dict() == {"ZZ": 1.0}
    with pytest.raises(ValueError):
        PauliSum.from_terms(2, {"XYZ": 1.0})


def test_snapshot_roundtrip():
    s = S({"XYZ": 0.1, "ZII": -1 / 3, "IIY": 2.5})
    text = s.to_snapshot()
    keys = [int(line.split()[0]) for line in text.splitlines()]
    assert keys == sorted(keys)
    back = PauliSum.from_snapshot(text, 3)
    assert back.to_dict() == s.to_dict()


def test_gate_examples():
    s = S({"XY": 0.3, "ZI": -1.2})
    assert apply_gate_adjoint(s, gate("XX", 0.0)).to_dict() == s.to_dict()
    assert apply_gate_adjoint(S({"Z": 1.0}), gate("Z", 0.7)).to_dict() == {"Z": 1.0}
    out = apply_gate_adjoint(S({"Z": 1.0}), gate("X", math.pi / 2))
    assert len(out) == 1
    # exp(i pi/4 X) Z exp(-i pi/4 X) = -Y... check with matrices
    u = np.cos(math.pi / 4) * np.eye(2) - 1j * np.sin(math.pi / 4) * dense("X")
    want = u.conj().T @ dense("Z") @ u
    assert np.allclose(densify(out).matrix, want, atol=1e-15)
    with pytest.raises(ValueError):
        PauliRotationGate(P("II"), 0.1)
    with pytest.raises(ValueError):
        apply_gate_adjoint(S({"Z": 1.0}), gate("XX", 0.1))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2 ** 31))
def test_gate_matches_dense_conjugation(n, seed):
    rng = np.random.default_rng(seed)
    labels = ["".join(rng.choice(list("IXYZ"), n)) for _ in range(5)]
    s = PauliSum.from_terms(n, [(lab, rng.normal()) for lab in labels])
    g = "".join(rng.choice(list("IXYZ"), n))
    if set(g) == {"I"}:
        g = "X" + g[1:]
    theta = float(rng.uniform(-4, 4))
    out = apply_gate_adjoint(s, gate(g, theta))
    u = np.cos(theta / 2) * np.eye(2 ** n) - 1j * np.sin(theta / 2) * dense(g)
    want = u.conj().T @ densify(s).matrix @ u
    assert np.allclose(densify(out).matrix, want, atol=1e-12, rtol=0)
    assert abs(out.sum_sq() - s.sum_sq()) <= 1e-12 * max(1.0, s.sum_sq())


def test_noise():
    s = S({"XXIZ": 1.0, "IIII": 2.0, "IYII": -0.5})
    out = apply_noise(s, NoiseLayer(0.1))
    assert out["XXIZ"] == pytest.approx(math.exp(-0.3), abs=1e-15)
    assert out["IIII"] == 2.0
    assert out["IYII"] == pytest.approx(-0.5 * math.exp(-0.1), abs=1e-15)
    assert apply_noise(s, NoiseLayer(0.0)).to_dict() == s.to_dict()
    for (p, a), (_, b) in zip(s.items(), out.items()):
        assert abs(b) <= abs(a)
        assert (abs(b) == abs(a)) == (p.weight == 0)
    with pytest.raises(ValueError):
        NoiseLayer(-0.1)


def test_truncate():
    s = S({"X": 0.5, "Y": 1e-6})
    assert truncate(s, 0.0).to_dict() == s.to_dict()
    assert truncate(s, 1e-3).to_dict() == {"X": 0.5}
    assert truncate(s, 0.5).to_dict() == {"X": 0.5}
    rng = np.random.default_rng(1)
    big = PauliSum(4, np.arange(256, dtype=np.uint64), rng.normal(size=256) * 10.0 ** rng.uniform(-6, 0, 256))
    counts = [len(truncate(big, eps)) for eps in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 0)]
    assert counts == sorted(counts)
    with pytest.raises(ValueError):
        truncate(s, -1)


def test_merge_examples():
    z3 = SymmetryGroup.translation_1d(3)
    s = S({"XII": 0.2, "IXI": 0.3, "IIX": 0.5})
    m = merge_by_symmetry(s, z3)
    assert len(m) == 1 and m["XII"] == pytest.approx(1.0)
    assert merge_by_symmetry(s, SymmetryGroup.trivial(3)).to_dict() == s.to_dict()
    mm = merge_by_symmetry(m, z3)
    assert mm.to_dict() == m.to_dict()
    with pytest.raises(ValueError):
        merge_by_symmetry(s, SymmetryGroup.translation_1d(4))


@given(st.integers(0, 2 ** 31))
def test_merge_preserves_orbit_mass(seed):
    rng = np.random.default_rng(seed)
    n = 5
    g = SymmetryGroup.dihedral(n)
    keys = rng.choice(4 ** n, size=40, replace=False).astype(np.uint64)
    s = PauliSum(n, keys, rng.normal(size=40))
    m = merge_by_symmetry(s, g)
    assert len(m) <= len(s)
    assert np.array_equal(g.canonical_keys(m.keys), m.keys)
    reps = g.canonical_keys(s.keys)
    for k, c in zip(m.keys, m.coeffs):
        assert c == pytest.approx(s.coeffs[reps == k].sum(), abs=1e-14)


def test_expectation_examples():
    n = 4
    plus = ProductState.plus(n)
    assert expectation(PauliSum.single(PauliString.identity(n), 2.5), plus) == 2.5
    assert expectation(PauliSum.single(PauliString.single(n, 0, "Z")), plus) == 0.0
    assert expectation(S({"XXII": 0.5}), plus) == 0.5
    merged = merge_by_symmetry(S({"XZII": 1.0}), SymmetryGroup.translation_1d(n))
    skew = ProductState(np.array([[1.0, 0, 0]] * 3 + [[0, 0, 1.0]]))
    with pytest.raises(ValueError):
        expectation(merged, skew)


def test_empty_and_commuting_circuits():
    obs = S({"ZIZI": 1.0})
    trace = propagate(obs, Circuit(4, []), PropagationConfig(symmetry=SymmetryGroup.translation_1d(4)),
                      ProductState.zero(4))
    assert len(trace.records) == 1 and trace.expectations[0] == 1.0
    layer = Layer([gate("ZZII", 0.3), gate("IZIZ", 1.1)])
    trace = propagate(obs, Circuit(4, [layer, layer]))
    assert trace.n_terms == [1, 1, 1]


def test_ising_matches_oracle_with_and_without_symmetry():
    p = IsingParams(4, layers=10)
    circuit = build_ising_circuit(p)
    obs = mid_chain_z(4)
    state = ProductState.plus(4)
    want = layer_expectations(obs, circuit, state)
    std = propagate(obs, circuit, PropagationConfig(), state)
    sym = propagate(obs, circuit, PropagationConfig(symmetry=SymmetryGroup.translation_1d(4)), state)
    assert np.allclose(std.expectations, want, atol=1e-8, rtol=0)
    assert np.allclose(sym.expectations, want, atol=1e-8, rtol=0)
    assert all(a >= b for a, b in zip(std.n_terms, sym.n_terms))
    assert max(std.n_terms) <= 4 ** 4 and max(sym.n_terms) <= 70


def test_merge_policies():
    p = IsingParams(5, layers=6)
    circuit = build_ising_circuit(p)
    obs, state = mid_chain_z(5), ProductState.plus(5)
    g = SymmetryGroup.translation_1d(5)
    base = propagate(obs, circuit, PropagationConfig(), state).expectations
    for policy in ("never", "after_each_layer", "after_k_layers(2)", "after_k_layers(4)"):
        trace = propagate(obs, circuit, PropagationConfig(symmetry=g, merge_policy=policy), state)
        assert np.allclose(trace.expectations, base, atol=1e-12)
    assert MergePolicy.parse("after_k_layers(3)").due(6)
    assert not MergePolicy.parse("after_k_layers(3)").due(4)
    with pytest.raises(ValueError):
        MergePolicy.parse("sometimes")


def test_memory_cap():
    circuit = build_ising_circuit(IsingParams(5, layers=5))
    with pytest.raises(ResourceLimitError) as err:
        propagate(mid_chain_z(5), circuit, PropagationConfig(memory_cap=30))
    assert err.value.layer is not None and err.value.layer >= 1


def test_noise_matches_oracle():
    rng = np.random.default_rng(3)
    circuit = random_circuit(3, 12, rng, layers=3).with_noise(0.2)
    obs = S({"ZIX": 1.0, "YYI": 0.4})
    state = ProductState.uniform(3, [0.3, -0.5, 0.6])
    got = propagate(obs, circuit, PropagationConfig(), state).expectations
    assert np.allclose(got, layer_expectations(obs, circuit, state), atol=1e-10)


def test_csv_format():
    trace = propagate(mid_chain_z(3), build_ising_circuit(IsingParams(3, layers=2)),
                      PropagationConfig(), ProductState.plus(3), time_step=0.25)
    lines = trace.to_csv(timing=False).splitlines()
    assert lines[0] == "layer,time,n_terms,sum_abs_coeff,sum_sq_coeff,expectation,wall_ms"
    assert len(lines) == 4
    row = lines[2].split(",")
    assert row[0] == "1" and row[1] == "0.25" and row[-1] == "0"
    assert float(row[5]) == trace.expectations[1]


def test_workers_give_identical_results():
    from sympp.models import XXZParams, build_xxz_circuit, total_spin_squared
    p = XXZParams(3, 2, layers=4)
    circuit = build_xxz_circuit(p)
    obs, state = total_spin_squared(6), ProductState.plus(6)
    runs = [propagate(obs, circuit, PropagationConfig(workers=w, epsilon=1e-6), state)
            for w in (1, 3)]
    assert runs[0].n_terms == runs[1].n_terms
    assert runs[0].expectations == runs[1].expectations
