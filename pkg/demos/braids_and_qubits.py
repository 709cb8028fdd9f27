"""Braiding four Fibonacci anyons that encode one qubit.

Builds the fusion-path basis, applies elementary braids, and reads the
resulting one-qubit gates off the encoded subspace.
"""
import numpy as np

from fibanyon import enumerate_basis
from fibanyon.codec import braid_protocol, decode, encode, extract_gate, leakage
from fibanyon.operators import apply_braid

np.set_printoptions(precision=6, suppress=True)

# Four anyons with trivial total charge span two fusion paths: |0> and |1>.
print("basis of 4 anyons, total charge 0:", enumerate_basis(4, 0))

# sigma_1 is diagonal on the qubit, sigma_1^5 is a Z gate up to phase.
r = extract_gate(braid_protocol([(1, 1)]), 1)
print("sigma_1 :\n", r / r[0, 0])
z = extract_gate(braid_protocol([(1, 5)]), 1)
print("sigma_1^5 :\n", z / z[0, 0])

# sigma_1 sigma_2 creates a superposition; the rightmost braid acts first.
reg = encode([1, 0])
state = apply_braid(apply_braid(reg.state, 2), 1)
v, leak = decode(state)
print("sigma_1 sigma_2 |0> =", v / v[0], "leak", leak)

# Braiding across two qubits leaks out of the encoded space.
two = encode([1, 0, 0, 0])
print("leak after sigma_4 on two qubits:", leakage(apply_braid(two.state, 4)))
