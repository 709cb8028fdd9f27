"""Measurement-assisted gates: D operators, Bell pairs, X, CZ and the Gamma ancilla."""
import itertools

import numpy as np

from fibanyon.codec import decode, encode, extract_gate, projective_deviation
from fibanyon.protocols.gates import BELL, CZ, D_OPERATORS
from fibanyon.protocols.preparation import gate_CZ, gate_X, prepare_bell, prepare_gamma
from fibanyon.trace import RandomSource

np.set_printoptions(precision=6, suppress=True)

for name, d in D_OPERATORS.items():
    print(name, np.diag(d))

rng = RandomSource(2024)
bell = prepare_bell(rng)
v, _ = decode(bell)
print("Bell pair:", v / v[1], "deviation", projective_deviation(v, BELL))

ok, out = gate_X(encode([0.6, 0.8]), prepare_bell(rng), rng, heralded=True)
print("X (0.6, 0.8) ->", decode(out)[0])

counter = itertools.count()
g = extract_gate(lambda r: gate_CZ(r, RandomSource(next(counter)), heralded=True)[1], 2)
print("simulated CZ deviation:", projective_deviation(g, CZ))

gamma = prepare_gamma(RandomSource(0))
print(f"Gamma: overlap {gamma.overlap():.15f}, attempts {gamma.attempts}, "
      f"per-attempt success {gamma.success_probability:.3g}")
