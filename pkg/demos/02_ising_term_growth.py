# # Term growth in the tilted-field Ising chain
#
# Propagate Z on the middle site backwards through the Trotter circuit, with
# and without merging translation-equivalent strings.  Without truncation the
# standard count climbs to every non-identity string and the merged count to
# every non-identity orbit.

from sympp import (
    ProductState,
    PropagationConfig,
    SymmetryGroup,
    count_representatives,
    propagate,
)
from sympp.models import IsingParams, build_ising_circuit, mid_chain_z

n = 5
params = IsingParams(n, h_x=1.4, h_z=0.9045, delta_t=0.25, layers=30)
circuit = build_ising_circuit(params)
state = ProductState.plus(n)

std = propagate(mid_chain_z(n), circuit, PropagationConfig(), state)
sym = propagate(mid_chain_z(n), circuit,
                PropagationConfig(symmetry=SymmetryGroup.translation_1d(n)), state)

print("layer  standard  merged  <Z>")
for a, b in zip(std.records, sym.records):
    print(f"{a.layer:5d} {a.n_terms:9d} {b.n_terms:7d}  {b.expectation:+.6f}")

print("bounds:", 4 ** n, count_representatives(SymmetryGroup.translation_1d(n)))
