# # Pauli strings, symmetry groups and orbit representatives
#
# Every Pauli string on n qubits is stored as an integer with two bits per
# qubit (I=0, X=1, Y=2, Z=3, qubit 0 in the lowest bits).  A symmetry group
# permutes qubits; strings related by a group element form an orbit, and the
# orbit's smallest integer is its representative.

from sympp import PauliString, SymmetryGroup, count_representatives, orbit, product
from sympp.pauli import apply_permutation

s = PauliString.from_label("IXI")
print(s, s.bits)

# Shifting every qubit one site to the left moves the X onto qubit 0.

shift = [2, 0, 1]
print(apply_permutation(s, shift))

# Products carry a phase that is a power of i.

r = product(PauliString.from_label("XY"), PauliString.from_label("YX"))
print(r)

# The orbit of XII under cyclic shifts of three qubits:

z3 = SymmetryGroup.translation_1d(3)
report = orbit(z3, PauliString.from_label("XII"))
print(report.representative, report.orbit_size, [str(m) for m in report.members])

# Burnside's lemma counts orbits without enumerating strings.

for n in range(2, 9):
    counts = {kind: count_representatives(SymmetryGroup.from_config(kind, n))
              for kind in ("translation_1d", "dihedral", "permutation_full")}
    print(n, 4 ** n, counts)
