"""Simulation of Fibonacci-anyon quantum computation.

The package builds fusion-path state spaces, braids and charge measurements
on them, encodes qubits in groups of four anyons, and runs the
measurement-assisted protocol that realizes the controlled rotation
``CR(2 pi / 5)`` exactly.
"""
from .codec import (QubitRegister, decode, encode, extract_gate, leakage, parse_braid_word,
                    projective_deviation, projectively_equal)
from .fusion_basis import PHI, AnyonState, dim, enumerate_basis, fidelity, inner_product
from .operators import (LinearOp, apply_braid, braid_generator, charge_projector, create_pair, force_fuse_vacuum,
                        fuse_adjacent, fusion_map, measure_charge, project_charge)
from .skein import evaluate, parse
from .trace import ProtocolTrace, RandomSource, ReplaySource

__version__ = "0.1.0"
