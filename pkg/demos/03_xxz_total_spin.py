# # Total spin under a power-law XXZ evolution on a 3x3 torus
#
# S^2 starts at its maximum n(n+2)/4 in the x-polarised product state.  We
# compare truncated propagation, with and without merging by the two lattice
# translations, against the dense 512x512 reference.  The reference takes a
# few seconds.

import numpy as np

from sympp import ProductState, PropagationConfig, SymmetryGroup, propagate
from sympp.models import XXZParams, build_xxz_circuit, spin_squared_plus, total_spin_squared
from sympp.oracle import layer_expectations

params = XXZParams(3, 3, j_perp=1.0, delta=-1.8, alpha=3.0, delta_t=0.05, layers=10)
circuit = build_xxz_circuit(params)
obs = total_spin_squared(params.n)
state = ProductState.plus(params.n)
torus = SymmetryGroup.translation_2d(3, 3)

exact = np.array(layer_expectations(obs, circuit, state))
print("S0^2 =", spin_squared_plus(params.n), exact[0])

for eps in (5e-2, 1e-3, 5e-5):
    sym = propagate(obs, circuit, PropagationConfig(epsilon=eps, symmetry=torus), state)
    std = propagate(obs, circuit, PropagationConfig(epsilon=eps), state)
    err = np.abs(np.array(sym.expectations) - exact).max()
    print(f"eps={eps:g}: max error {err:.2e}, final terms merged {sym.n_terms[-1]} "
          f"vs standard {std.n_terms[-1]}")
