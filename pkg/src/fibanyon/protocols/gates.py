"""Named gates, ancilla amplitudes and the ten-state walk bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..fusion_basis import PHI

THETA = 2 * np.pi / 5
COS, SIN = np.cos(THETA), np.sin(THETA)

Z1 = COS - 1j * SIN
Z2 = PHI * COS + 1j * SIN

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
R_GATE = np.diag([np.exp(-4j * np.pi / 5), np.exp(3j * np.pi / 5)])

ALPHA = np.array([1, PHI**0.5], dtype=complex)
BETA = np.array([1, -(PHI**0.5)], dtype=complex)
# sigma_1^2 sigma_2^-2 |0>
MIDDLE = np.array([PHI**0.5 * COS, -1j * SIN])

D_OPERATORS = {
    "D1": np.diag([0, 1, 1, PHI**-0.5]).astype(complex),
    "D2": np.diag([-PHI, 1, 1, 0]).astype(complex),
    "D3": np.diag([1, 1, 1, -1 / PHI]).astype(complex),
    "D4": np.diag([1, 1, 1, -(PHI**-2)]).astype(complex),
}

G1 = np.diag([Z1, Z1.conjugate(), Z1.conjugate(), Z1])
G2 = np.diag([Z2, Z2.conjugate(), Z2.conjugate(), Z2])
GATES = {"G1": G1, "G2": G2, "G1inv": G1.conj(), "G2inv": G2.conj()}

BELL = np.array([0, 1, 1, 0], dtype=complex)


def controlled_rotation_matrix(theta: float = THETA) -> np.ndarray:
    return np.diag([1, 1, 1, np.exp(1j * theta)])


CR = controlled_rotation_matrix()
CZ = controlled_rotation_matrix(np.pi)


def gamma_vector(conjugate: bool = False) -> np.ndarray:
    """Amplitudes of the three-qubit ancilla in the encoded basis."""
    g = (PHI**0.5 * COS * np.kron(np.kron(ALPHA, [1, 0]), ALPHA)
         - 1j * SIN * np.kron(np.kron(BETA, [0, 1]), BETA))
    return g.conj() if conjugate else g


def cz_composite() -> np.ndarray:
    """Product of the four diagonal stages that make up the CZ preparation."""
    xx, xi, ix = np.kron(X, X), np.kron(X, I2), np.kron(I2, X)
    d3, d4 = D_OPERATORS["D3"], D_OPERATORS["D4"]
    return (xx @ d4 @ xx) @ (xi @ d4 @ xi) @ (ix @ d4 @ ix) @ d3 @ d3


@dataclass(frozen=True)
class WalkState:
    """Accumulated gate ``G1**k G2**l`` with ``k`` mod 5 and ``l`` in {0, 1}."""

    k: int = 0
    l: int = 0

    def __post_init__(self):
        if self.l not in (0, 1):
            raise ValueError("l must be 0 or 1")
        object.__setattr__(self, "k", self.k % 5)

    @property
    def done(self) -> bool:
        return (self.k, self.l) == (1, 0)

    def step(self, label: str) -> "WalkState":
        if self.l == 0:
            if label == "G1":
                return WalkState(self.k + 1, 0)
            if label == "G2":
                return WalkState(self.k, 1)
        else:
            if label == "G1inv":
                return WalkState(self.k - 1, 1)
            if label == "G2inv":
                return WalkState(self.k, 0)
        raise ValueError(f"label {label!r} cannot occur in walk state {self}")

    def matrix(self) -> np.ndarray:
        return np.linalg.matrix_power(G1, self.k) @ np.linalg.matrix_power(G2, self.l)


ALL_WALK_STATES = tuple(WalkState(k, l) for l in (0, 1) for k in range(5))
