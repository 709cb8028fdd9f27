"""Ancilla preparation: braided qubits, D-operators, Bell pairs, X, CZ and Gamma.

Preparations may fail; a failed attempt is thrown away and the preparation
starts over.  Two execution styles are offered:

* sampled: every fusion and D-operator outcome is drawn with the Born rule
  and a failure triggers a restart, up to a retry budget;
* heralded: the attempt is conditioned on the success branch at every step,
  the product of the branch probabilities is accumulated, and the number of
  attempts a sampled restart loop would have needed is drawn from the
  matching geometric distribution.  The delivered state is identical.

The heralded style is the only practical one for Gamma, whose per-attempt
success probability is far below the reach of literal restarts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..codec import LeakageError, QubitRegister, decode, encode, path_word
from ..fusion_basis import PRUNE, VACUUM, AnyonState
from ..operators import apply_braid, fuse_adjacent, postselect_fusion
from ..trace import RandomSource
from .gates import D_OPERATORS, gamma_vector
from .layout import insert_block, juxtapose

PREP_BUDGET = 10**4


class PreparationError(RuntimeError):
    """A preparation exhausted its retry budget."""


class _Attempt:
    """Outcome handling for one preparation attempt."""

    def __init__(self, rng: RandomSource, heralded: bool):
        self.rng = rng
        self.heralded = heralded
        self.probability = 1.0

    def fuse(self, state: AnyonState, k: int, want: int, op: str) -> AnyonState | None:
        if self.heralded:
            post, p = postselect_fusion(state, k, want)
            self.probability *= p
            self.rng.log(op, params={"pair": [k, k + 1], "heralded": True},
                         outcome=want, probability=p, dim=post.dim)
            return post if p > 0 else None
        c, post = fuse_adjacent(state, k, self.rng, op=op)
        return post if c == want else None

    def kraus(self, state: AnyonState, diag: np.ndarray, qubits: tuple[int, int],
              op: str) -> AnyonState | None:
        post = _apply_diagonal(state, diag / np.max(np.abs(diag)), qubits)
        p = post.norm() ** 2 / state.norm() ** 2
        if self.heralded:
            self.probability *= p
            ok = p > 0
        else:
            ok = self.rng.uniform() < p
        self.rng.log(op, params={"qubits": list(qubits), "heralded": self.heralded},
                     outcome=int(ok), probability=p, dim=state.dim)
        return post.normalize() if ok else None


def _apply_diagonal(state: AnyonState, diag: np.ndarray, qubits: tuple[int, int]) -> AnyonState:
    q0, q1 = qubits
    amps = {}
    for path, a in state.amps.items():
        bits = path_word(path)
        if bits is None:
            if abs(a) > 1e-12:
                raise LeakageError("diagonal two-qubit operator applied to a leaky register")
            continue
        d = diag[2 * bits[q0] + bits[q1]]
        if d != 0:
            amps[path] = a * d
    return AnyonState(state.n, state.total, amps)


def _geometric_attempts(p: float, rng: RandomSource) -> int:
    """Attempts until the first success for success probability ``p``."""
    if p >= 1.0:
        return 1
    u = rng.uniform()
    return 1 + int(math.floor(math.log1p(-u) / math.log1p(-p)))


ZERO = AnyonState.basis((1, 0, 1, 0))


def make_alpha(rng: RandomSource | None = None) -> QubitRegister:
    """``sigma_1 sigma_2 |0>``, proportional to ``(1, phi**0.5)``."""
    return QubitRegister(apply_braid(apply_braid(ZERO, 2), 1))


def make_beta(rng: RandomSource | None = None) -> QubitRegister:
    """``sigma_1**-4 sigma_2 |0>``, proportional to ``(1, -phi**0.5)``."""
    return QubitRegister(apply_braid(apply_braid(ZERO, 2), 1, -4))


def make_middle(rng: RandomSource | None = None) -> QubitRegister:
    """``sigma_1**2 sigma_2**-2 |0>``."""
    return QubitRegister(apply_braid(apply_braid(ZERO, 2, -2), 1, 2))


def apply_D(register: QubitRegister, which: str, rng: RandomSource,
            qubits: tuple[int, int] = (0, 1), heralded: bool = False) -> tuple[bool, QubitRegister | None]:
    """Apply ``D / ||D||`` as the success branch of a two-outcome operation.

    Success happens with probability ``||D psi||^2 / ||D||^2``; on failure the
    input is consumed and ``(False, None)`` is returned.
    """
    post = _Attempt(rng, heralded).kraus(register.state, np.diag(D_OPERATORS[which]), qubits, which)
    return (False, None) if post is None else (True, QubitRegister(post))


def prepare_bell(rng: RandomSource, budget: int = PREP_BUDGET) -> QubitRegister:
    """Sampled restarts of ``D1 D2 |alpha alpha>`` until both operators succeed."""
    for attempt in range(1, budget + 1):
        reg = QubitRegister(juxtapose(make_alpha().state, make_alpha().state))
        ok, reg = apply_D(reg, "D2", rng)
        if ok:
            ok, reg = apply_D(reg, "D1", rng)
        if ok:
            rng.log("prepare_bell", outcome="ok", params={"attempts": attempt}, dim=reg.state.dim)
            return reg
    raise PreparationError(f"Bell state not prepared within {budget} attempts")


def _x_on(state: AnyonState, qubit: int, bell: QubitRegister, attempt: _Attempt) -> AnyonState | None:
    # The Bell pair sits right of the target block; its left half is annihilated
    # against the target from the inside out, leaving its right half in place.
    start = 4 * qubit
    state = insert_block(state, start + 4, bell.state)
    for k in (start + 4, start + 3, start + 2, start + 1):
        state = attempt.fuse(state, k, VACUUM, "x_fuse")
        if state is None:
            return None
    return state


def gate_X(register: QubitRegister, bell: QubitRegister, rng: RandomSource,
           qubit: int = 0, heralded: bool = False) -> tuple[bool, QubitRegister | None]:
    """Pauli X on one encoded qubit, consuming a Bell pair.

    Succeeds when all four fusions reach the vacuum.  With ``heralded=True``
    the result is the success branch and the branch probability is logged.
    """
    post = _x_on(register.state, qubit, bell, _Attempt(rng, heralded))
    return (False, None) if post is None else (True, QubitRegister(post))


def _cz_on(state: AnyonState, q: int, attempt: _Attempt) -> AnyonState | None:
    """(XX D4 XX)(XI D4 XI)(IX D4 IX) D3 D3 on qubits ``q, q+1``, in time order."""
    rng = attempt.rng
    qubits = (q, q + 1)
    d3, d4 = np.diag(D_OPERATORS["D3"]), np.diag(D_OPERATORS["D4"])
    schedule = [("D", d3), ("D", d3),
                ("X", (q + 1,)), ("D", d4), ("X", (q + 1,)),
                ("X", (q,)), ("D", d4), ("X", (q,)),
                ("X", (q, q + 1)), ("D", d4), ("X", (q, q + 1))]
    for kind, arg in schedule:
        if kind == "D":
            state = attempt.kraus(state, arg, qubits, "D3" if arg is d3 else "D4")
            if state is None:
                return None
        else:
            for target in arg:
                state = _x_on(state, target, prepare_bell(rng), attempt)
                if state is None:
                    return None
    return state


def gate_CZ(register: QubitRegister, rng: RandomSource, qubits: tuple[int, int] = (0, 1),
            heralded: bool = False) -> tuple[bool, QubitRegister | None]:
    """Controlled-Z on two neighbouring qubits from D-operators and X gates."""
    if qubits[1] != qubits[0] + 1:
        raise ValueError("CZ acts on neighbouring qubits")
    post = _cz_on(register.state, qubits[0], _Attempt(rng, heralded))
    return (False, None) if post is None else (True, QubitRegister(post))


@dataclass(frozen=True)
class AncillaGamma:
    """Prepared three-qubit ancilla (12 anyons)."""

    register: QubitRegister
    conjugated: bool = False
    success_probability: float = 1.0
    attempts: int = 1

    def overlap(self) -> float:
        """``|<Gamma_def|Gamma>|`` with both sides normalized."""
        v, _ = decode(self.register)
        ref = gamma_vector(self.conjugated)
        return float(abs(np.vdot(ref / np.linalg.norm(ref), v)))


def prepare_gamma(rng: RandomSource, heralded: bool = True,
                  budget: int = PREP_BUDGET) -> AncillaGamma:
    """Prepare Gamma: the middle qubit between two alphas, then CZ left and CZ right.

    ``budget`` bounds the sampled restarts; in heralded mode the attempt count
    is drawn, not simulated, and is only reported.
    """
    def build() -> AnyonState:
        return juxtapose(make_alpha().state, make_middle().state, make_alpha().state)

    if heralded:
        attempt = _Attempt(rng, heralded=True)
        state = _cz_on(build(), 0, attempt)
        state = _cz_on(state, 1, attempt)
        p = attempt.probability
        n_attempts = _geometric_attempts(p, rng)
        rng.log("prepare_gamma", params={"heralded": True, "attempts": n_attempts},
                outcome="ok", probability=p, dim=state.dim)
        return AncillaGamma(QubitRegister(state), False, p, n_attempts)

    for n_attempts in range(1, budget + 1):
        attempt = _Attempt(rng, heralded=False)
        state = _cz_on(build(), 0, attempt)
        if state is not None:
            state = _cz_on(state, 1, attempt)
        if state is not None:
            rng.log("prepare_gamma", params={"heralded": False, "attempts": n_attempts},
                    outcome="ok", dim=state.dim)
            return AncillaGamma(QubitRegister(state), False, float("nan"), n_attempts)
    raise PreparationError(f"Gamma not prepared within {budget} attempts")


def conjugate_gamma(g: AncillaGamma) -> AncillaGamma:
    """Complex-conjugate Gamma by a Z (five half twists) on the middle qubit."""
    state = apply_braid(g.register.state, 5, 5)
    return AncillaGamma(QubitRegister(state), not g.conjugated, g.success_probability, g.attempts)


def encoded_gamma(conjugate: bool = False) -> AncillaGamma:
    """Gamma written down directly from its defining amplitudes."""
    return AncillaGamma(encode(gamma_vector(conjugate)), conjugate)


class GammaFactory:
    """Source of Gamma ancillas for the gate protocol.

    With ``cache=True`` one ancilla is prepared (heralded simulation) on the
    first request and reused, since every successful preparation delivers the
    same state.  With ``cache=False`` each request runs a fresh preparation.
    """

    def __init__(self, seed=0, cache: bool = True):
        self.rng = seed if isinstance(seed, RandomSource) else RandomSource(seed)
        self.cache = cache
        self._gamma: AncillaGamma | None = None
        self.prepared = 0

    def __call__(self) -> AncillaGamma:
        if self._gamma is None or not self.cache:
            self._gamma = prepare_gamma(self.rng, heralded=True)
            self.prepared += 1
        return self._gamma
