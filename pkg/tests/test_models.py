import itertools
import math

import numpy as np
import pytest

from sympp import PauliString, ProductState, PropagationConfig, SymmetryGroup, propagate
from sympp.models import (
    IsingParams,
    XXZParams,
    build_ising_circuit,
    build_xxz_circuit,
    mid_chain_site,
    mid_chain_z,
    random_symmetric_circuit,
    spin_squared_plus,
    total_spin_squared,
    xxz_pairs,
)
from sympp.oracle import densify, exact_expectation
from sympp.pauli import apply_permutation
from sympp.states import overlap

from helpers import dense

P = PauliString.from_label


def gate_set(layer):
    return {(g.generator, round(g.angle, 14)) for g in layer.gates}


def test_ising_layer_structure():
    c = build_ising_circuit(IsingParams(4, layers=3))
    assert len(c) == 3 and len(c.layers[0].gates) == 12
    kinds = ["".join(sorted(set(str(g.generator)) - {"I"})) for g in c.layers[0].gates]
    assert kinds == ["Z"] * 8 + ["X"] * 4
    assert [g.generator.weight for g in c.layers[0].gates[:4]] == [2] * 4
    with pytest.raises(ValueError):
        IsingParams(2)
    assert (IsingParams(5).h_x, IsingParams(5).h_z) == (1.4, 0.9045)


def test_ising_layer_is_translation_invariant():
    n = 6
    layer = build_ising_circuit(IsingParams(n)).layers[0]
    shift = [(i - 1) % n for i in range(n)]
    gates = gate_set(layer)
    assert {(apply_permutation(p, shift), a) for p, a in gates} == gates


def test_ising_angles_follow_trotter_factor():
    p = IsingParams(3, h_x=0.7, h_z=0.3, delta_t=0.1)
    layer = build_ising_circuit(p).layers[0]
    # exp(+i dt J P) for H = -J P is the rotation exp(-i theta/2 P) with theta = -2 dt J
    g = layer.gates[-1]
    u = np.cos(g.angle / 2) * np.eye(8) - 1j * np.sin(g.angle / 2) * dense(str(g.generator))
    want = np.cos(0.1 * 0.7) * np.eye(8) + 1j * np.sin(0.1 * 0.7) * dense(str(g.generator))
    assert np.allclose(u, want)


def test_ising_without_fields_keeps_single_term():
    n = 5
    c = build_ising_circuit(IsingParams(n, h_x=0.0, h_z=0.0, layers=4))
    trace = propagate(mid_chain_z(n), c)
    assert trace.n_terms == [1] * 5


def test_integrable_point_grows_slowly():
    n = 10
    c = build_ising_circuit(IsingParams(n, h_z=0.0, layers=3))
    trace = propagate(mid_chain_z(n), c)
    assert max(trace.n_terms) <= n ** 3 < 4 ** n


def test_mid_chain_site():
    assert [mid_chain_site(n) for n in (3, 4, 5, 7)] == [1, 1, 2, 3]
    assert str(mid_chain_z(5).paulis()[0]) == "IIZII"


def test_xxz_structure():
    p = XXZParams(3, 3, delta=-1.8, alpha=3)
    c = build_xxz_circuit(p)
    layer = c.layers[0]
    assert len(xxz_pairs(p)) == 36 and len(layer.gates) == 108
    by_pair = {}
    for g in layer.gates:
        sites = tuple(q for q in range(9) if g.generator.code(q))
        by_pair.setdefault(sites, {})[str(g.generator).replace("I", "")[0]] = g.angle
    for angles in by_pair.values():
        assert angles["Y"] == angles["X"]
        assert angles["Z"] / angles["X"] == pytest.approx(-0.8)
    gates = gate_set(layer)
    x_shift = [3 * (q // 3) + (q % 3 - 1) % 3 for q in range(9)]
    y_shift = [(q - 3) % 9 for q in range(9)]
    for perm in (x_shift, y_shift):
        assert {(apply_permutation(g, perm), a) for g, a in gates} == gates


def test_xxz_special_points():
    flat = build_xxz_circuit(XXZParams(3, 2, alpha=0)).layers[0]
    assert len({g.angle for g in flat.gates if "X" in str(g.generator)}) == 1
    iso = build_xxz_circuit(XXZParams(3, 2, delta=0.0)).layers[0]
    xs = sorted(g.angle for g in iso.gates if "X" in str(g.generator))
    zs = sorted(g.angle for g in iso.gates if "Z" in str(g.generator))
    assert xs == zs
    assert all(d > 0 for _, _, d in xxz_pairs(XXZParams(2, 1)))


def test_xxz_orderings_differ_only_by_trotter_error():
    p = XXZParams(2, 2, layers=2, alpha=1.0)
    state = ProductState.plus(4)
    a = propagate(total_spin_squared(4), build_xxz_circuit(p, "sublayer"), state=state)
    b = propagate(total_spin_squared(4), build_xxz_circuit(p, "pairwise"), state=state)
    assert np.allclose(a.expectations, b.expectations, atol=1e-2)
    with pytest.raises(ValueError):
        build_xxz_circuit(p, "random")


def test_spin_squared():
    assert total_spin_squared(1).to_dict() == {"I": 0.75}
    s2 = total_spin_squared(2)
    assert s2.to_dict() == {"II": 1.5, "XX": 0.5, "YY": 0.5, "ZZ": 0.5}
    sig = {c: sum(dense("".join(c if q == k else "I" for q in range(2))) for k in range(2)) / 2
           for c in "XYZ"}
    assert np.allclose(densify(s2).matrix, sum(m @ m for m in sig.values()))
    for n in range(1, 7):
        assert len(total_spin_squared(n)) == 1 + 3 * math.comb(n, 2)
        value = exact_expectation(densify(total_spin_squared(n)), ProductState.plus(n))
        assert value == pytest.approx(spin_squared_plus(n), abs=1e-12)
    assert exact_expectation(densify(total_spin_squared(4)), ProductState.plus(4)) == \
        pytest.approx(6.0, abs=1e-12)


def test_spin_squared_is_permutation_invariant():
    s = total_spin_squared(4)
    for perm in itertools.permutations(range(4)):
        moved = {str(apply_permutation(p, perm)): c for p, c in s.items()}
        assert moved == s.to_dict()


def test_overlap_examples():
    assert overlap(ProductState.plus(3), P("IXI")) == 1.0
    assert overlap(ProductState.zero(2), P("ZZ")) == 1.0
    assert overlap(ProductState.uniform(1, [0.6, 0, 0.8]), P("X")) == pytest.approx(0.6)
    with pytest.raises(ValueError):
        ProductState.uniform(2, [1.0, 1.0, 0.0])


def test_random_symmetric_circuit_layers_are_invariant():
    rng = np.random.default_rng(0)
    for group in (SymmetryGroup.translation_1d(5), SymmetryGroup.dihedral(4),
                  SymmetryGroup.permutation_full(4)):
        c = random_symmetric_circuit(group, 3, rng)
        perms = (list(itertools.permutations(range(group.n_qubits)))
                 if group.kind == "permutation_full" else group.elements)
        for layer in c.layers:
            gates = gate_set(layer)
            for g in perms:
                assert {(apply_permutation(p, g), a) for p, a in gates} == gates
