"""End-to-end controlled rotation CR(2 pi/5) with its random walk.

Each attached Gamma either fuses (applying one of G1, G2 or their inverses)
or is recovered; the walk stops once the accumulated product equals G1.
"""
import numpy as np

from fibanyon.codec import decode, encode, projective_deviation
from fibanyon.protocols.execution import controlled_rotation
from fibanyon.protocols.gates import CR
from fibanyon.trace import RandomSource

np.set_printoptions(precision=6, suppress=True)

v = np.array([1, 1j, -1, 0.5]) / np.linalg.norm([1, 1j, -1, 0.5])
for seed in range(5):
    src = RandomSource(seed, trace=True)
    w = controlled_rotation(encode(v), src)
    out, leak = decode(w.register)
    path = " -> ".join(f"({s.k},{s.l})" for s in w.states)
    print(f"seed {seed}: labels {' '.join(w.labels)}")
    print(f"  walk {path}")
    print(f"  recoveries {w.recoveries}, leak {leak:.2g}, deviation {projective_deviation(out, CR @ v):.2g},"
          f" trace events {len(src.trace)}")
