"""Logical qubits stored in blocks of four anyons with trivial total charge.

Qubit ``j`` (0-based) occupies anyons ``4j+1 .. 4j+4``.  Inside a block the
two charge-0 fusion paths are ``|0> = (1,0,1,0)`` (both pairs in the vacuum
channel) and ``|1> = (1,1,1,0)``.  Because every block closes with running
charge 0, a word of ``m`` bits maps to the concatenation of its block paths.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fusion_basis import VACUUM, AnyonState, PRUNE
from .operators import apply_braid_word

BLOCK = {0: (1, 0, 1, 0), 1: (1, 1, 1, 0)}
_BLOCK_BIT = {v: k for k, v in BLOCK.items()}

GATE_TOL = 1e-9


class LeakageError(RuntimeError):
    pass


class LayoutError(ValueError):
    pass


class BranchError(RuntimeError):
    """A protocol took different outcome branches on different probe inputs."""


def word_path(bits) -> tuple[int, ...]:
    return tuple(x for b in bits for x in BLOCK[int(b)])


def path_word(path) -> tuple[int, ...] | None:
    """Inverse of :func:`word_path`; ``None`` for paths outside the code space."""
    if len(path) % 4:
        return None
    bits = []
    for j in range(0, len(path), 4):
        b = _BLOCK_BIT.get(tuple(path[j:j + 4]))
        if b is None:
            return None
        bits.append(b)
    return tuple(bits)


@dataclass(frozen=True)
class QubitRegister:
    """An anyon state read as ``m = n / 4`` encoded qubits."""

    state: AnyonState

    def __post_init__(self):
        if self.state.n % 4 or self.state.total != VACUUM:
            raise LayoutError(f"{self.state.n} anyons with total charge {self.state.total} "
                              "do not form a register of 4-anyon qubits")

    @property
    def m(self) -> int:
        return self.state.n // 4

    @property
    def n(self) -> int:
        return self.state.n

    def amplitudes(self) -> np.ndarray:
        return decode(self)[0]

    @property
    def leak(self) -> float:
        return decode(self)[1]


def encode(v) -> QubitRegister:
    """Encode ``2**m`` amplitudes (big-endian words, qubit 0 leftmost)."""
    v = np.asarray(v, dtype=complex).ravel()
    m = int(round(np.log2(len(v)))) if len(v) else -1
    if m < 0 or 2**m != len(v):
        raise ValueError(f"amplitude vector length {len(v)} is not a power of two")
    nrm = np.linalg.norm(v)
    if nrm < PRUNE:
        raise ValueError("cannot encode the zero vector")
    amps = {word_path(bits): complex(a) / nrm
            for bits, a in zip(itertools.product((0, 1), repeat=m), v) if abs(a) > PRUNE}
    return QubitRegister(AnyonState(4 * m, VACUUM, amps))


def decode(r: QubitRegister | AnyonState) -> tuple[np.ndarray, float]:
    """Code-space amplitudes of the normalized state, and its leakage.

    ``leak = 1 - ||v||^2`` is the weight outside the encoded subspace.
    """
    state = r.state if isinstance(r, QubitRegister) else r
    if state.n % 4:
        raise LayoutError(f"{state.n} anyons cannot be split into 4-anyon qubits")
    m = state.n // 4
    norm2 = state.norm() ** 2
    v = np.zeros(2**m, dtype=complex)
    if norm2 == 0:
        return v, 1.0
    scale = 1 / np.sqrt(norm2)
    for path, a in state.amps.items():
        bits = path_word(path)
        if bits is not None:
            v[int("".join(map(str, bits)) or "0", 2)] = a * scale
    leak = max(0.0, 1.0 - float(np.vdot(v, v).real))
    return v, leak


def leakage(r: QubitRegister | AnyonState) -> float:
    return decode(r)[1]


def projective_scale(a, b) -> complex:
    """Scalar ``s`` with ``a / s ~ b``, taken at the largest entry of ``b``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[idx]) == 0:
        raise ValueError("reference must be nonzero")
    return a[idx] / b[idx]


def projective_deviation(a, b) -> float:
    """``max |a / s - b|`` with ``s`` from :func:`projective_scale`."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    s = projective_scale(a, b)
    if s == 0:
        return float("inf")
    return float(np.max(np.abs(a / s - b)))


def projectively_equal(a, b, tol: float = GATE_TOL) -> bool:
    return projective_deviation(a, b) <= tol


def extract_gate(protocol: Callable, m: int, tol: float = GATE_TOL) -> np.ndarray:
    """Matrix (up to scale) that ``protocol`` performs on ``m`` encoded qubits.

    ``protocol`` maps a :class:`QubitRegister` to a register, or to a
    ``(register, branch_label)`` pair.  It is applied to every basis word and
    to the uniform superposition, which fixes the relative scale and phase
    of the columns.
    """
    d = 2**m
    probes = [np.eye(d)[j] for j in range(d)] + [np.ones(d)]
    images = []
    labels = set()
    for v in probes:
        out = protocol(encode(v))
        if isinstance(out, tuple):
            out, label = out
            labels.add(label)
        w, leak = decode(out)
        if leak > tol:
            raise LeakageError(f"protocol image leaks {leak:.3e} out of the code space")
        images.append(w)
    if len(labels) > 1:
        raise BranchError(f"protocol took branches {sorted(map(str, labels))}")
    cols = np.column_stack(images[:d])
    coef, *_ = np.linalg.lstsq(cols, images[d], rcond=None)
    gate = cols * coef
    resid = np.linalg.norm(gate.sum(axis=1) - images[d])
    if resid > np.sqrt(tol):
        raise BranchError(f"probe image is inconsistent with the basis images (residual {resid:.3e})")
    return gate


_TOKEN = re.compile(r"^s(\d+)(?:\^([+-]?\d+))?$")


def parse_braid_word(text: str) -> list[tuple[int, int]]:
    """Parse ``"s1 s2^-2"`` into generator/power pairs, in time order.

    The word is read like an operator product, so the rightmost token acts
    first: ``"s1 s2"`` is ``sigma_1 sigma_2``.
    """
    word = []
    for tok in text.split():
        mt = _TOKEN.match(tok)
        if not mt:
            raise ValueError(f"bad braid token {tok!r}; expected sK or sK^P")
        word.append((int(mt.group(1)), int(mt.group(2) or 1)))
    return word[::-1]


def braid_protocol(word) -> Callable[[QubitRegister], QubitRegister]:
    """A protocol applying a braid word (time order) to a register."""
    def run(r: QubitRegister) -> QubitRegister:
        return QubitRegister(apply_braid_word(r.state, word))
    return run
