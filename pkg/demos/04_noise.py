# # Weight-damping noise
#
# After each layer every coefficient is multiplied by exp(-gamma |P|), where
# |P| counts non-identity factors.  High-weight strings decay quickly, which
# keeps the operator small.

from sympp import NoiseLayer, PauliSum, ProductState, PropagationConfig, SymmetryGroup, apply_noise, propagate
from sympp.models import IsingParams, build_ising_circuit, mid_chain_z

print(apply_noise(PauliSum.from_terms(4, {"XXIZ": 1.0, "IIII": 1.0}), NoiseLayer(0.1)))

n = 7
circuit = build_ising_circuit(IsingParams(n, layers=20))
group = SymmetryGroup.translation_1d(n)
for gamma in (0.0, 0.05, 0.2):
    trace = propagate(mid_chain_z(n), circuit.with_noise(gamma),
                      PropagationConfig(epsilon=1e-4, symmetry=group), ProductState.plus(n))
    print(gamma, trace.n_terms[-1], round(trace.expectations[-1], 6))
